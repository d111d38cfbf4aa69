// graphon-ldp: command-line front end for the rate-function library.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldp/errors.hpp"
#include "ldp/expansion.hpp"
#include "ldp/families.hpp"
#include "ldp/graphon.hpp"
#include "ldp/montecarlo.hpp"
#include "ldp/optimizer.hpp"
#include "ldp/rate.hpp"
#include "ldp/report.hpp"
#include "ldp/spectral.hpp"

using nlohmann::json;
using namespace ldp;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNotConverged = 3 };

struct ConfigError : Error {
    using Error::Error;
};

struct AllRowsFailed : Error {
    using Error::Error;
};

json default_config() {
    const ReferenceSpec spec;
    const json ref{{"family", spec.family}, {"resolution", spec.resolution}, {"p", spec.p},
                   {"nu_coefficients", spec.nu_coefficients}, {"p11", spec.p11}, {"p12", spec.p12},
                   {"p22", spec.p22}, {"split", spec.split}, {"path", spec.path}, {"eta", nullptr}};
    const OptimizerOptions o;
    const ExpansionConfig e;
    return {
        {"reference", ref},
        {"seed", 0},
        {"threads", 1},
        {"betas", json::array()},
        {"warm_start", true},
        {"regime", "center"},
        {"epsilons", {0.02, 0.01, 0.005}},
        {"resolution_extrapolation", false},
        {"optimizer",
         {{"constraint_tol", o.constraint_tol},
          {"kkt_tol", o.kkt_tol},
          {"max_outer", o.max_outer},
          {"max_inner", o.max_inner},
          {"random_starts", o.random_starts}}},
        {"expansion",
         {{"truncation_order", e.truncation_order},
          {"fixed_point_tol", e.fixed_point_tol},
          {"max_sweeps", e.max_sweeps},
          {"damping", e.damping},
          {"guard_fraction", e.guard_fraction}}},
        {"rank", 0},
        {"perturbation", 0.0},
        {"grid", ""},
        {"grid2", ""},
        {"n", 400},
        {"replicates", 50},
        {"format", "csv"},
        {"out", ""},
    };
}

// "0.3+0.4x-0.1x^2" or "0.3,0.4,-0.1" -> {0.3, 0.4, -0.1}
std::vector<double> parse_polynomial(const std::string& text) {
    std::string s;
    for (char ch : text) {
        if (ch != ' ') s += ch;
    }
    std::vector<double> coeffs;
    if (s.find('x') == std::string::npos) {
        std::stringstream in(s);
        std::string item;
        while (std::getline(in, item, ',')) {
            try {
                std::size_t used = 0;
                coeffs.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("cannot parse nu coefficient '" + item + "'");
            }
        }
        if (coeffs.empty()) throw ConfigError("empty nu specification");
        return coeffs;
    }
    static const std::regex term(R"(([+-]?)(\d*\.?\d*(?:[eE][+-]?\d+)?)(\*?x(?:\^(\d+))?)?)");
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::smatch m;
        const std::string rest = s.substr(pos);
        if (!std::regex_search(rest, m, term, std::regex_constants::match_continuous) || m.length(0) == 0) {
            throw ConfigError("cannot parse polynomial '" + text + "'");
        }
        const bool has_x = m[3].matched && m.length(3) > 0;
        if (m.length(2) == 0 && !has_x) throw ConfigError("cannot parse polynomial '" + text + "'");
        double c = m.length(2) > 0 ? std::stod(m[2].str()) : 1.0;
        if (m[1].str() == "-") c = -c;
        const std::size_t power = has_x ? (m[4].matched ? std::stoul(m[4].str()) : 1) : 0;
        if (coeffs.size() <= power) coeffs.resize(power + 1, 0.0);
        coeffs[power] += c;
        pos += static_cast<std::size_t>(m.length(0));
    }
    return coeffs;
}

std::string wall_clock() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json metadata(const std::string& command, const json& config) {
    return {{"tool", "graphon-ldp"},
            {"version", LDP_VERSION},
            {"command", command},
            {"config", config},
            {"rng", kGeneratorName},
            {"wall_clock", wall_clock()}};
}

void emit(const json& config, const std::string& command, const std::string& body) {
    const std::string text = metadata(command, config).dump() + "\n" + body;
    const std::string path = config.at("out").get<std::string>();
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << text;
}

ReferenceSpec reference_spec(const json& config) {
    ReferenceSpec spec;
    from_json(config.at("reference"), spec);
    return spec;
}

OptimizerOptions optimizer_options(const json& config) {
    OptimizerOptions o;
    const json& j = config.at("optimizer");
    o.constraint_tol = j.value("constraint_tol", o.constraint_tol);
    o.kkt_tol = j.value("kkt_tol", o.kkt_tol);
    o.max_outer = j.value("max_outer", o.max_outer);
    o.max_inner = j.value("max_inner", o.max_inner);
    o.random_starts = j.value("random_starts", o.random_starts);
    o.seed = config.at("seed").get<std::uint64_t>();
    return o;
}

ExpansionConfig expansion_config(const json& config) {
    ExpansionConfig e;
    const json& j = config.at("expansion");
    e.truncation_order = j.value("truncation_order", e.truncation_order);
    e.fixed_point_tol = j.value("fixed_point_tol", e.fixed_point_tol);
    e.max_sweeps = j.value("max_sweeps", e.max_sweeps);
    e.damping = j.value("damping", e.damping);
    e.guard_fraction = j.value("guard_fraction", e.guard_fraction);
    return e;
}

unsigned thread_count(const json& config) {
    const int t = config.at("threads").get<int>();
    if (t < 1) throw ConfigError("threads must be >= 1");
    return static_cast<unsigned>(t);
}

// Subcommands ---------------------------------------------------------------

void cmd_constants(const json& config) {
    const auto r = build_reference(reference_spec(config));
    json body = to_json(reference_constants(r));
    body["resolution"] = r.resolution();
    body["eta"] = r.eta();
    body["rank1"] = r.is_rank1();
    emit(config, "constants", body.dump(2) + "\n");
}

void cmd_norm(const json& config) {
    const std::string grid = config.at("grid").get<std::string>();
    const GridGraphon h = grid.empty() ? build_reference(reference_spec(config)).grid() : load_grid(grid);
    json body = to_json(operator_norm(h));
    body["resolution"] = h.resolution();
    body["source"] = grid.empty() ? "reference" : grid;
    emit(config, "norm", body.dump(2) + "\n");
}

void cmd_psi(const json& config) {
    const auto r = build_reference(reference_spec(config));
    const auto betas = config.at("betas").get<std::vector<double>>();
    if (betas.empty()) throw ConfigError("psi needs at least one beta (--beta or --beta-range)");
    for (double b : betas) {
        if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("beta " + format_double(b) + " outside [0, 1]");
    }
    PsiCurveOptions opts;
    opts.optimizer = optimizer_options(config);
    opts.warm_start = config.at("warm_start").get<bool>();
    opts.threads = thread_count(config);
    const auto rows = psi_curve(r, betas, opts);
    std::ostringstream csv;
    write_psi_csv(csv, rows);
    emit(config, "psi", csv.str());
    for (const auto& row : rows) {
        if (!row.error.empty()) std::cerr << "beta " << format_double(row.beta) << ": " << row.error << "\n";
    }
    if (std::none_of(rows.begin(), rows.end(), [](const PsiRow& row) { return row.converged; })) {
        throw AllRowsFailed("no beta row converged");
    }
}

void cmd_scaling(const json& config) {
    const auto r = build_reference(reference_spec(config));
    const Regime regime = parse_regime(config.at("regime").get<std::string>());
    const auto eps = config.at("epsilons").get<std::vector<double>>();
    ScalingOptions opts;
    opts.optimizer = optimizer_options(config);
    opts.resolution_extrapolation = config.at("resolution_extrapolation").get<bool>();
    const auto report = scaling_probe(r, regime, eps, opts);
    std::ostringstream csv;
    write_scaling_csv(csv, report);
    emit(config, "scaling", csv.str());
    auto note = [](const char* side, const std::optional<double>& v) {
        if (v) std::cerr << "ratio extrapolated to eps -> 0 (" << side << "): " << format_double(*v) << "\n";
    };
    note("upper", report.ratio_extrapolated_upper);
    note("lower", report.ratio_extrapolated_lower);
    for (const auto& row : report.rows) {
        if (!row.error.empty()) std::cerr << "eps " << format_double(row.epsilon) << ": " << row.error << "\n";
    }
    if (std::none_of(report.rows.begin(), report.rows.end(), [](const ScalingRow& row) { return row.converged; })) {
        throw AllRowsFailed("no epsilon row converged");
    }
}

void cmd_expand(const json& config) {
    const auto r = build_reference(reference_spec(config));
    const std::string grid = config.at("grid").get<std::string>();
    GridGraphon h = r.grid();
    if (!grid.empty()) {
        h = load_grid(grid);
        if (h.resolution() != r.resolution()) throw ResolutionMismatch("grid and reference resolutions differ");
    } else if (const double s = config.at("perturbation").get<double>(); s != 0.0) {
        const auto field = optimal_perturbation(r, parse_regime(config.at("regime").get<std::string>()));
        h = GridGraphon((r.grid().values() + s * field.delta).cwiseMax(0.0).cwiseMin(1.0));
    }
    const ExpansionConfig cfg = expansion_config(config);
    const int rank = config.at("rank").get<int>();
    ExpansionResult res;
    json body;
    if (rank <= 0) {
        if (!r.is_rank1()) throw ConfigError("expand without --rank needs a rank-1 reference");
        res = rank1_norm_fixedpoint(h, r.nu(), cfg);
        body["expansion"] = "rank1";
    } else {
        // Expand around the top-rank part of the reference's spectral decomposition.
        const auto n = static_cast<Eigen::Index>(r.resolution());
        if (rank > n) throw ConfigError("rank exceeds the resolution");
        Eigen::SelfAdjointEigenSolver<Matrix> es(r.grid().values() / static_cast<double>(n));
        std::vector<double> thetas;
        std::vector<Vector> nus;
        for (int k = 0; k < rank; ++k) {
            const Eigen::Index idx = n - 1 - k;
            thetas.push_back(es.eigenvalues()(idx));
            nus.push_back(es.eigenvectors().col(idx) * std::sqrt(static_cast<double>(n)));
        }
        res = finiterank_norm_fixedpoint(h, thetas, nus, cfg);
        body["expansion"] = "finite_rank";
        body["thetas"] = thetas;
    }
    body["result"] = to_json(res);
    const double direct = operator_norm(h).norm;
    body["operator_norm"] = direct;
    body["difference"] = res.norm - direct;
    emit(config, "expand", body.dump(2) + "\n");
}

void cmd_sample(const json& config) {
    const auto r = build_reference(reference_spec(config));
    const auto n = config.at("n").get<std::size_t>();
    const auto reps = config.at("replicates").get<std::size_t>();
    const auto stats =
        spectral_sample_stats(r, n, reps, config.at("seed").get<std::uint64_t>(), thread_count(config));
    const std::string format = config.at("format").get<std::string>();
    if (format == "json") {
        emit(config, "sample", to_json(stats).dump(2) + "\n");
    } else if (format == "csv") {
        std::ostringstream csv;
        write_sample_csv(csv, stats);
        emit(config, "sample", csv.str());
        std::cerr << "mean " << format_double(stats.mean) << " sd " << format_double(stats.stddev) << " median "
                  << format_double(stats.q50) << "\n";
    } else {
        throw ConfigError("format must be csv or json");
    }
}

void cmd_cutnorm(const json& config) {
    const std::string a = config.at("grid").get<std::string>();
    const std::string b = config.at("grid2").get<std::string>();
    if (a.empty()) throw ConfigError("cutnorm needs --grid (and --grid2, or a reference)");
    const GridGraphon h1 = load_grid(a);
    const GridGraphon h2 = b.empty() ? build_reference(reference_spec(config)).grid() : load_grid(b);
    const json body{{"cut", cut_norm_distance(h1, h2)}, {"l1", l1_distance(h1, h2)}, {"l2", l2_distance(h1, h2)}};
    emit(config, "cutnorm", body.dump(2) + "\n");
}

// Flags ---------------------------------------------------------------------

struct Flags {
    std::string config_path;
    std::string family, nu, file, out, regime, grid, grid2, format, beta_range;
    std::size_t resolution = 0, n = 0, replicates = 0;
    double p = 0, p11 = 0, p12 = 0, p22 = 0, split = 0, eta = 0, perturbation = 0;
    double constraint_tol = 0, kkt_tol = 0, fixed_point_tol = 0, guard_fraction = 0;
    int random_starts = 0, truncation = 0, rank = 0, max_sweeps = 0, max_outer = 0, max_inner = 0;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    std::vector<double> betas, epsilons;
    bool cold = false, resolution_extrapolation = false;
};

void add_options(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config_path, "JSON config file; flags override its values");
    app.add_option("--family", f.family, "reference family: constant, rank1, two_block, file");
    app.add_option("--resolution,-N", f.resolution, "blocks per axis");
    app.add_option("--p", f.p, "constant family value");
    app.add_option("--nu", f.nu, "rank1 nu as a polynomial ('0.3+0.4x') or coefficient list ('0.3,0.4')");
    app.add_option("--p11", f.p11);
    app.add_option("--p12", f.p12);
    app.add_option("--p22", f.p22);
    app.add_option("--split", f.split, "two_block split point");
    app.add_option("--file", f.file, "reference grid file (family file)");
    app.add_option("--eta", f.eta, "certificate eta; default min(min r, 1 - max r)");
    app.add_option("--beta", f.betas, "target norms (repeatable)");
    app.add_option("--beta-range", f.beta_range, "start:stop:count, inclusive");
    app.add_flag("--cold", f.cold, "independent cold starts run concurrently instead of a warm-started sweep");
    app.add_option("--regime", f.regime, "center, right_end or left_end");
    app.add_option("--eps", f.epsilons, "epsilon values for scaling");
    app.add_flag("--resolution-extrapolation", f.resolution_extrapolation, "also solve at N/2 and extrapolate");
    app.add_option("--constraint-tol", f.constraint_tol);
    app.add_option("--kkt-tol", f.kkt_tol);
    app.add_option("--random-starts", f.random_starts);
    app.add_option("--max-outer", f.max_outer, "augmented-Lagrangian outer iterations");
    app.add_option("--max-inner", f.max_inner, "L-BFGS iterations per outer step");
    app.add_option("--truncation", f.truncation, "series order, 0 = automatic");
    app.add_option("--fixed-point-tol", f.fixed_point_tol);
    app.add_option("--max-sweeps", f.max_sweeps);
    app.add_option("--guard-fraction", f.guard_fraction);
    app.add_option("--rank", f.rank, "expand around the top-k spectral part of the reference");
    app.add_option("--perturbation", f.perturbation, "expand: h = r + s * field(regime)");
    app.add_option("--grid", f.grid, "graphon grid file (norm, expand, cutnorm)");
    app.add_option("--grid2", f.grid2, "second grid file (cutnorm)");
    app.add_option("--n", f.n, "vertices per sampled graph");
    app.add_option("--replicates", f.replicates);
    app.add_option("--format", f.format, "sample output: csv or json");
    app.add_option("--threads", f.threads, "worker cap");
    app.add_option("--seed", f.seed, "master seed");
    app.add_option("--out,-o", f.out, "output path (default stdout)");
}

bool given(const CLI::App& app, const std::string& name) {
    return app.count(name) > 0;
}

std::vector<double> parse_range(const std::string& spec) {
    std::stringstream in(spec);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c)) {
        throw ConfigError("beta range must be start:stop:count");
    }
    double lo = 0, hi = 0;
    long count = 0;
    try {
        lo = std::stod(a);
        hi = std::stod(b);
        count = std::stol(c);
    } catch (const std::exception&) {
        throw ConfigError("beta range must be start:stop:count");
    }
    if (count < 1) throw ConfigError("beta range count must be >= 1");
    std::vector<double> out;
    for (long i = 0; i < count; ++i) {
        out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
}

json resolve_config(const CLI::App& app, const Flags& f) {
    json config = default_config();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw ConfigError("cannot open config file '" + f.config_path + "'");
        json file;
        try {
            in >> file;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config file: ") + e.what());
        }
        config.merge_patch(file);
    }
    json& ref = config["reference"];
    if (given(app, "--family")) ref["family"] = f.family;
    if (given(app, "--resolution")) ref["resolution"] = f.resolution;
    if (given(app, "--p")) ref["p"] = f.p;
    if (given(app, "--nu")) ref["nu_coefficients"] = parse_polynomial(f.nu);
    if (given(app, "--p11")) ref["p11"] = f.p11;
    if (given(app, "--p12")) ref["p12"] = f.p12;
    if (given(app, "--p22")) ref["p22"] = f.p22;
    if (given(app, "--split")) ref["split"] = f.split;
    if (given(app, "--file")) {
        ref["path"] = f.file;
        if (!given(app, "--family")) ref["family"] = "file";
    }
    if (given(app, "--eta")) ref["eta"] = f.eta;
    if (ref.contains("nu") && ref["nu"].is_string()) {
        ref["nu_coefficients"] = parse_polynomial(ref["nu"].get<std::string>());
        ref.erase("nu");
    }
    if (given(app, "--beta")) config["betas"] = f.betas;
    if (given(app, "--beta-range")) {
        std::vector<double> betas = given(app, "--beta") ? f.betas : std::vector<double>{};
        for (double b : parse_range(f.beta_range)) betas.push_back(b);
        config["betas"] = betas;
    }
    if (given(app, "--cold")) config["warm_start"] = !f.cold;
    if (given(app, "--regime")) config["regime"] = f.regime;
    if (given(app, "--eps")) config["epsilons"] = f.epsilons;
    if (given(app, "--resolution-extrapolation")) config["resolution_extrapolation"] = f.resolution_extrapolation;
    if (given(app, "--constraint-tol")) config["optimizer"]["constraint_tol"] = f.constraint_tol;
    if (given(app, "--kkt-tol")) config["optimizer"]["kkt_tol"] = f.kkt_tol;
    if (given(app, "--random-starts")) config["optimizer"]["random_starts"] = f.random_starts;
    if (given(app, "--max-outer")) config["optimizer"]["max_outer"] = f.max_outer;
    if (given(app, "--max-inner")) config["optimizer"]["max_inner"] = f.max_inner;
    if (given(app, "--truncation")) config["expansion"]["truncation_order"] = f.truncation;
    if (given(app, "--fixed-point-tol")) config["expansion"]["fixed_point_tol"] = f.fixed_point_tol;
    if (given(app, "--max-sweeps")) config["expansion"]["max_sweeps"] = f.max_sweeps;
    if (given(app, "--guard-fraction")) config["expansion"]["guard_fraction"] = f.guard_fraction;
    if (given(app, "--rank")) config["rank"] = f.rank;
    if (given(app, "--perturbation")) config["perturbation"] = f.perturbation;
    if (given(app, "--grid")) config["grid"] = f.grid;
    if (given(app, "--grid2")) config["grid2"] = f.grid2;
    if (given(app, "--n")) config["n"] = f.n;
    if (given(app, "--replicates")) config["replicates"] = f.replicates;
    if (given(app, "--format")) config["format"] = f.format;
    if (given(app, "--threads")) config["threads"] = f.threads;
    if (given(app, "--seed")) config["seed"] = f.seed;
    if (given(app, "--out")) config["out"] = f.out;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Large-deviation rate functions for the top eigenvalue of inhomogeneous random graphs"};
    app.set_version_flag("--version", std::string(LDP_VERSION));
    app.require_subcommand(1);
    Flags flags;
    add_options(app, flags);

    const std::map<std::string, std::pair<std::string, void (*)(const json&)>> commands{
        {"constants", {"closed-form constants of the reference", cmd_constants}},
        {"norm", {"operator norm of the reference or a grid file", cmd_norm}},
        {"psi", {"rate function on a grid of beta values (CSV)", cmd_psi}},
        {"scaling", {"scaling probe near C_r, 1 or 0 (CSV)", cmd_scaling}},
        {"expand", {"operator norm from the series expansion", cmd_expand}},
        {"sample", {"Monte Carlo top eigenvalue of sampled graphs", cmd_sample}},
        {"cutnorm", {"cut, l1 and l2 distances between grids", cmd_cutnorm}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const json config = resolve_config(app, flags);
        commands.at(command).second(config);
        return kOk;
    } catch (const AllRowsFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotConverged;
    } catch (const NoConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotConverged;
    } catch (const NotConverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotConverged;
    } catch (const Error& e) {
        // Validation, parse, domain and hypothesis failures are all input problems.
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const json::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
