#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace signgate {

/// Raised when an iterative method exhausts its budget or its inputs violate
/// a numerical precondition (for example an unbracketed root).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Integration / bracketing domain. An infinite endpoint marks that side as
/// half-infinite.
class Interval {
public:
    Interval(double lo, double hi);

    static Interval real_line() {
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool lo_infinite() const { return std::isinf(lo_); }
    bool hi_infinite() const { return std::isinf(hi_); }
    bool finite() const { return !lo_infinite() && !hi_infinite(); }
    double width() const { return hi_ - lo_; }
    bool contains(double x) const { return x > lo_ && x < hi_; }

private:
    double lo_;
    double hi_;
};

using ScalarFn = std::function<double(double)>;

double std_normal_pdf(double x);

/// Phi(x), absolute error below 1e-15 (erfc based).
double std_normal_cdf(double x);

/// Phi^{-1}(p). Throws std::domain_error unless 0 < p < 1.
double std_normal_quantile(double p);

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-15;
    int max_subintervals = 4000;
    /// Infinite sides are scanned outward in doubling panels until two
    /// consecutive panels contribute less than this.
    double tail_cutoff = 1e-13;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature. The domain is split at
/// every kink inside it before any subdivision so no panel straddles a kink.
double integrate(const ScalarFn& f, const Interval& domain, const QuadratureOptions& opts,
                 std::span<const double> kinks = {});

inline double integrate(const ScalarFn& f, const Interval& domain, double tol = 1e-8,
                        std::span<const double> kinks = {}) {
    QuadratureOptions opts;
    opts.rel_tol = tol;
    return integrate(f, domain, opts, kinks);
}

/// Brent's method. Requires f(lo) * f(hi) <= 0 on a finite bracket;
/// returns once the bracket is narrower than tol.
double find_root(const ScalarFn& f, const Interval& bracket, double tol = 1e-8, int max_iter = 300);

struct ScalarOptimum {
    double argmax;
    double max;
};

/// Golden-section maximization seeded by a 17-point interior pre-grid. Only
/// interior points are evaluated, so the domain endpoints are never returned.
ScalarOptimum maximize_scalar(const ScalarFn& f, const Interval& domain, double tol = 1e-4);

} // namespace signgate
