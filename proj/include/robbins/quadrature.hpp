#pragma once

#include <functional>
#include <stdexcept>

namespace robbins::quadrature {

struct QuadConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;

    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions_used = 0;
    bool converged = true;
};

/// Thrown when the integrand returns NaN or infinity.
class IntegrandError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
///
/// The interval with the largest error estimate is bisected until the total
/// error estimate drops below max(abs_tol, rel_tol * |value|) or the
/// subdivision budget is spent; in the latter case `converged` is false and
/// the best estimate is still returned.
QuadResult integrate(const Integrand& f, double a, double b, const QuadConfig& cfg = {});

/// Integral of f over [a, inf) through y = a + u / (1 - u), u in [0, 1).
QuadResult integrate_semi_infinite(const Integrand& f, double a, const QuadConfig& cfg = {});

/// Accumulate another piece into a running result (sums values and errors).
QuadResult& operator+=(QuadResult& lhs, const QuadResult& rhs);

}  // namespace robbins::quadrature
