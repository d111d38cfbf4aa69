#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ldp/errors.hpp"
#include "ldp/expansion.hpp"
#include "ldp/families.hpp"
#include "ldp/graphon.hpp"
#include "ldp/montecarlo.hpp"
#include "ldp/optimizer.hpp"
#include "ldp/rate.hpp"
#include "ldp/report.hpp"
#include "ldp/spectral.hpp"

namespace py = pybind11;
using namespace ldp;

namespace {

py::object to_python(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_python(v));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it) out[py::str(it.key())] = to_python(it.value());
            return out;
        }
        default: return py::none();
    }
}

nlohmann::json from_python(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        nlohmann::json out = nlohmann::json::object();
        for (auto item : obj.cast<py::dict>()) out[item.first.cast<std::string>()] = from_python(item.second);
        return out;
    }
    if (py::isinstance<py::sequence>(obj)) {
        nlohmann::json out = nlohmann::json::array();
        for (auto item : obj.cast<py::sequence>()) out.push_back(from_python(item));
        return out;
    }
    throw py::type_error("unsupported value in reference specification");
}

OptimizerOptions optimizer_options(double constraint_tol, double kkt_tol, int random_starts, std::uint64_t seed) {
    OptimizerOptions o;
    o.constraint_tol = constraint_tol;
    o.kkt_tol = kkt_tol;
    o.random_starts = random_starts;
    o.seed = seed;
    return o;
}

py::dict psi_row(const PsiRow& r) {
    py::dict d;
    d["beta"] = r.beta;
    d["psi"] = r.psi;
    d["converged"] = r.converged;
    d["kkt_residual"] = r.kkt_residual;
    d["warmstart"] = r.warmstart;
    d["beta_achieved"] = r.beta_achieved;
    d["step_l2"] = r.step_l2;
    d["error"] = r.error;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Rate functions for the largest eigenvalue of inhomogeneous random graphs";
    m.attr("__version__") = LDP_VERSION;

    static py::exception<Error> base(m, "LdpError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });

    py::class_<GridGraphon>(m, "GridGraphon")
        .def(py::init<Matrix>(), py::arg("values"))
        .def_static("constant", &GridGraphon::constant, py::arg("n"), py::arg("p"))
        .def_property_readonly("resolution", &GridGraphon::resolution)
        .def_property_readonly("values", [](const GridGraphon& g) { return g.values(); })
        .def("__repr__", [](const GridGraphon& g) { return "GridGraphon(N=" + std::to_string(g.resolution()) + ")"; });

    py::class_<ReferenceGraphon>(m, "ReferenceGraphon")
        .def_property_readonly("grid", &ReferenceGraphon::grid)
        .def_property_readonly("eta", &ReferenceGraphon::eta)
        .def_property_readonly("resolution", &ReferenceGraphon::resolution)
        .def_property_readonly("is_rank1", &ReferenceGraphon::is_rank1)
        .def_property_readonly("nu", [](const ReferenceGraphon& r) -> py::object {
            if (!r.is_rank1()) return py::none();
            return py::cast(Vector(r.nu()));
        });

    m.def("validate_reference", &validate_reference, py::arg("grid"), py::arg("eta"));
    m.def("make_rank1_reference", &make_rank1_reference, py::arg("nu"), py::arg("eta"));
    m.def("reflect", &reflect, py::arg("r"));
    m.def(
        "build_reference",
        [](const py::dict& spec) {
            ReferenceSpec s;
            from_json(from_python(spec), s);
            return build_reference(s);
        },
        py::arg("spec"), "Builtin family from a dict such as {'family': 'rank1', 'nu_coefficients': [0.3, 0.4]}.");

    m.def("block_average", &block_average, py::arg("h"), py::arg("m"));
    m.def("cut_norm_distance", &cut_norm_distance, py::arg("h1"), py::arg("h2"));
    m.def("l2_distance", &l2_distance, py::arg("h1"), py::arg("h2"));

    m.def(
        "operator_norm",
        [](const GridGraphon& h) {
            const auto s = operator_norm(h);
            return py::make_tuple(s.norm, s.eigenfunction);
        },
        py::arg("h"), "(norm, eigenfunction) of the graphon operator.");

    m.def("bernoulli_relent", &bernoulli_relent, py::arg("a"), py::arg("b"));
    m.def(
        "rate_I", [](const GridGraphon& h, const ReferenceGraphon& r) { return rate_I(h, r); }, py::arg("h"),
        py::arg("r"));
    m.def(
        "reference_constants", [](const ReferenceGraphon& r) { return to_python(to_json(reference_constants(r))); },
        py::arg("r"));

    m.def(
        "rank1_norm_fixedpoint",
        [](const GridGraphon& h, const Vector& nu, int truncation_order) {
            ExpansionConfig cfg;
            cfg.truncation_order = truncation_order;
            return to_python(to_json(rank1_norm_fixedpoint(h, nu, cfg)));
        },
        py::arg("h"), py::arg("nu"), py::arg("truncation_order") = 0);
    m.def(
        "finiterank_norm_fixedpoint",
        [](const GridGraphon& h, const std::vector<double>& thetas, const std::vector<Vector>& nus,
           double guard_fraction) {
            ExpansionConfig cfg;
            cfg.guard_fraction = guard_fraction;
            return to_python(to_json(finiterank_norm_fixedpoint(h, thetas, nus, cfg)));
        },
        py::arg("h"), py::arg("thetas"), py::arg("nus"), py::arg("guard_fraction") = 0.25);

    m.def(
        "minimize_rate_at_norm",
        [](const ReferenceGraphon& r, double beta, double constraint_tol, double kkt_tol, int random_starts,
           std::uint64_t seed) {
            OptimizerOptions o = optimizer_options(constraint_tol, kkt_tol, random_starts, seed);
            o.throw_on_failure = false;
            OptimizationResult res;
            {
                py::gil_scoped_release release;
                res = minimize_rate_at_norm(r, beta, o);
            }
            return to_python(to_json(res, true));
        },
        py::arg("r"), py::arg("beta"), py::arg("constraint_tol") = 1e-7, py::arg("kkt_tol") = 1e-7,
        py::arg("random_starts") = 0, py::arg("seed") = 0);

    m.def(
        "psi_curve",
        [](const ReferenceGraphon& r, const std::vector<double>& betas, bool warm_start, unsigned threads) {
            PsiCurveOptions o;
            o.warm_start = warm_start;
            o.threads = threads;
            std::vector<PsiRow> rows;
            {
                py::gil_scoped_release release;
                rows = psi_curve(r, betas, o);
            }
            py::list out;
            for (const auto& row : rows) out.append(psi_row(row));
            return out;
        },
        py::arg("r"), py::arg("betas"), py::arg("warm_start") = true, py::arg("threads") = 1);

    m.def(
        "scaling_probe",
        [](const ReferenceGraphon& r, const std::string& regime, const std::vector<double>& epsilons,
           bool resolution_extrapolation) {
            ScalingOptions o;
            o.resolution_extrapolation = resolution_extrapolation;
            ScalingReport rep;
            {
                py::gil_scoped_release release;
                rep = scaling_probe(r, parse_regime(regime), epsilons, o);
            }
            return to_python(to_json(rep));
        },
        py::arg("r"), py::arg("regime"), py::arg("epsilons"), py::arg("resolution_extrapolation") = false);

    m.def(
        "optimal_perturbation",
        [](const ReferenceGraphon& r, const std::string& regime) {
            return optimal_perturbation(r, parse_regime(regime)).delta;
        },
        py::arg("r"), py::arg("regime"));

    m.def(
        "witness_upper_bound",
        [](const ReferenceGraphon& r, double beta) {
            const auto w = witness_upper_bound(r, beta);
            return py::make_tuple(w.value, w.family);
        },
        py::arg("r"), py::arg("beta"));

    m.def("sample_graph", &sample_graph, py::arg("r"), py::arg("n"), py::arg("seed"));
    m.def("max_eigenvalue", &max_eigenvalue, py::arg("adjacency"), py::arg("tol") = 1e-9);
    m.def(
        "spectral_sample_stats",
        [](const ReferenceGraphon& r, std::size_t n, std::size_t replicates, std::uint64_t seed, unsigned threads) {
            SampleStats s;
            {
                py::gil_scoped_release release;
                s = spectral_sample_stats(r, n, replicates, seed, threads);
            }
            return to_python(to_json(s));
        },
        py::arg("r"), py::arg("n"), py::arg("replicates"), py::arg("seed"), py::arg("threads") = 1);
}
