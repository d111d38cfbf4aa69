#include "ldp/errors.hpp"

#include <sstream>

namespace ldp {

namespace {

template <typename... Args>
std::string concat(const Args&... args) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << args);
    return os.str();
}

}  // namespace

EtaViolation::EtaViolation(std::size_t i, std::size_t j, double v, double e)
    : Error(concat("EtaViolation: entry (", i, ",", j, ") = ", v, " outside [", e, ", ", 1.0 - e, "]")),
      row(i), col(j), value(v), eta(e) {}

AsymmetryError::AsymmetryError(std::size_t i, std::size_t j, double d)
    : Error(concat("AsymmetryError: |h(", i, ",", j, ") - h(", j, ",", i, ")| = ", d)),
      row(i), col(j), deviation(d) {}

RangeError::RangeError(std::size_t i, std::size_t j, double v)
    : Error(concat("RangeError: entry (", i, ",", j, ") = ", v, " outside [0, 1]")),
      row(i), col(j), value(v) {}

ParseError::ParseError(std::size_t l, const std::string& what)
    : Error(concat("ParseError at line ", l, ": ", what)), line(l) {}

TooLargeForExact::TooLargeForExact(std::size_t n)
    : Error(concat("TooLargeForExact: resolution ", n, " exceeds the exhaustive limit 22")) {}

NoConvergence::NoConvergence(long it, double res)
    : Error(concat("NoConvergence after ", it, " iterations (residual ", res, ")")),
      iterations(it), residual(res) {}

TailNotNegligible::TailNotNegligible(double r)
    : Error(concat("TailNotNegligible: ||g||_2 / mu = ", r, " >= 0.9")), ratio(r) {}

DegenerateEigenvalue::DegenerateEigenvalue(double g)
    : Error(concat("DegenerateEigenvalue: spectral gap ", g, " < 1e-10")), gap(g) {}

}  // namespace ldp
