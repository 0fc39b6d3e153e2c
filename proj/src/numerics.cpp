#include "signgate/numerics.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

namespace signgate {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
        std::ostringstream msg;
        msg << "invalid interval (" << lo << ", " << hi << ")";
        throw std::invalid_argument(msg.str());
    }
}

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace {

// Acklam's rational approximation, relative error ~1e-9 before refinement.
double acklam_lower(double p) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("std_normal_quantile: p must lie in (0, 1)");
    }
    if (p == 0.5) {
        return 0.0;
    }
    // Work in the lower tail and reflect; Halley steps against erfc recover
    // full double precision there.
    const bool upper = p > 0.5;
    const double tail = upper ? 1.0 - p : p;
    double x = acklam_lower(tail);
    for (int i = 0; i < 2; ++i) {
        const double e = std_normal_cdf(x) - tail;
        const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return upper ? -x : x;
}

namespace {

constexpr std::array<double, 8> kronrod_nodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kronrod_weights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> gauss_weights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const ScalarFn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kronrod_weights[7];
    double gauss = fc * gauss_weights[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kronrod_weights[j] * sum;
        if (j % 2 == 1) {
            gauss += gauss_weights[j / 2] * sum;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

double adaptive_finite(const ScalarFn& f, std::vector<double> breaks, const QuadratureOptions& opts) {
    std::priority_queue<Panel> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        Panel p = gauss_kronrod(f, breaks[i], breaks[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (count >= opts.max_subintervals) {
            std::ostringstream msg;
            msg << "integrate: no convergence on [" << breaks.front() << ", " << breaks.back()
                << "] after " << count << " panels (estimate " << total << ", error " << total_err << ")";
            throw NumericalError(msg.str());
        }
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Panel is at machine resolution; accept what we have.
            break;
        }
        const Panel left = gauss_kronrod(f, worst.a, mid);
        const Panel right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Re-sum to shed the drift of the incremental updates.
    double sum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        heap.pop();
    }
    return sum;
}

// Integrates outward from `start` in doubling panels until the tail is
// negligible. direction is +1 or -1.
double integrate_tail(const ScalarFn& f, double start, int direction, double reference,
                      const QuadratureOptions& opts) {
    double sum = 0.0;
    double width = 1.0;
    double edge = start;
    int quiet = 0;
    for (int panel = 0; panel < 64; ++panel) {
        const double next = edge + direction * width;
        const double lo = std::min(edge, next);
        const double hi = std::max(edge, next);
        const double part = adaptive_finite(f, {lo, hi}, opts);
        sum += part;
        const double scale = std::max(std::abs(reference + sum), 1.0);
        quiet = std::abs(part) < opts.tail_cutoff * scale ? quiet + 1 : 0;
        if (quiet >= 2) {
            return sum;
        }
        edge = next;
        width *= 2.0;
    }
    throw NumericalError("integrate: tail did not decay over 64 doubling panels");
}

} // namespace

double integrate(const ScalarFn& f, const Interval& domain, const QuadratureOptions& opts,
                 std::span<const double> kinks) {
    std::vector<double> inner;
    for (double k : kinks) {
        if (domain.contains(k)) {
            inner.push_back(k);
        }
    }
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());

    // Anchor the finite core between the outermost finite points.
    double core_lo = domain.lo_infinite() ? (inner.empty() ? 0.0 : inner.front()) : domain.lo();
    double core_hi = domain.hi_infinite() ? (inner.empty() ? 0.0 : inner.back()) : domain.hi();
    if (domain.lo_infinite() && !domain.hi_infinite()) {
        core_lo = std::min(core_lo, core_hi - 1.0);
    }
    if (domain.hi_infinite() && !domain.lo_infinite()) {
        core_hi = std::max(core_hi, core_lo + 1.0);
    }

    double core = 0.0;
    if (core_hi > core_lo) {
        std::vector<double> breaks{core_lo};
        for (double k : inner) {
            if (k > core_lo && k < core_hi) {
                breaks.push_back(k);
            }
        }
        breaks.push_back(core_hi);
        core = adaptive_finite(f, breaks, opts);
    }
    double total = core;
    if (domain.hi_infinite()) {
        total += integrate_tail(f, core_hi, +1, total, opts);
    }
    if (domain.lo_infinite()) {
        total += integrate_tail(f, core_lo, -1, total, opts);
    }
    return total;
}

double find_root(const ScalarFn& f, const Interval& bracket, double tol, int max_iter) {
    if (!bracket.finite()) {
        throw BracketError("find_root: bracket must be finite");
    }
    double a = bracket.lo();
    double b = bracket.hi();
    double fa = f(a);
    double fb = f(b);
    if (std::isnan(fa) || std::isnan(fb)) {
        throw NumericalError("find_root: function is NaN at a bracket endpoint");
    }
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    if ((fa > 0.0) == (fb > 0.0)) {
        std::ostringstream msg;
        msg << "find_root: f(" << a << ") = " << fa << " and f(" << b << ") = " << fb
            << " do not straddle a sign change";
        throw BracketError(msg.str());
    }

    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) {
            return b;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p;
            double q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            }
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw NumericalError("find_root: iteration budget exhausted");
}

ScalarOptimum maximize_scalar(const ScalarFn& f, const Interval& domain, double tol) {
    if (!domain.finite()) {
        throw std::invalid_argument("maximize_scalar: domain must be finite");
    }
    constexpr int grid_points = 17;
    const double step = domain.width() / (grid_points + 1);
    std::array<double, grid_points> xs{};
    std::array<double, grid_points> fs{};
    int best = 0;
    for (int k = 0; k < grid_points; ++k) {
        xs[k] = domain.lo() + step * (k + 1);
        fs[k] = f(xs[k]);
        if (fs[k] > fs[best]) {
            best = k;
        }
    }

    double a = best == 0 ? domain.lo() : xs[best - 1];
    double b = best == grid_points - 1 ? domain.hi() : xs[best + 1];
    ScalarOptimum incumbent{xs[best], fs[best]};

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    for (const auto& [x, fx] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
        if (fx > incumbent.max) {
            incumbent = {x, fx};
        }
    }
    return incumbent;
}

} // namespace signgate
