#include "signgate/procedures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace signgate {

std::size_t DecisionSet::rejections() const {
    return static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), std::uint8_t{1}));
}

double two_sided_p(double y) {
    return std::erfc(std::abs(y) / std::numbers::sqrt2);
}

namespace {

void require_level(double alpha_s, double upper, const char* who) {
    if (!(alpha_s > 0.0 && alpha_s < upper)) {
        throw std::invalid_argument(std::string(who) + ": alpha_s must lie in (0, " + std::to_string(upper) + ")");
    }
}

int sign_of(double v) {
    return (v > 0.0) - (v < 0.0);
}

DecisionSet empty_decisions(std::size_t m) {
    DecisionSet d;
    d.rejected.assign(m, 0);
    d.sign.assign(m, 0);
    return d;
}

std::vector<double> p_values(const Dataset& y) {
    std::vector<double> p(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        p[i] = two_sided_p(y[i]);
    }
    return p;
}

// k* = max{k : p_(k) <= c k / m}, zero when no k qualifies.
std::size_t step_up(std::vector<double> p, double c) {
    std::sort(p.begin(), p.end());
    const double m = static_cast<double>(p.size());
    for (std::size_t k = p.size(); k > 0; --k) {
        if (p[k - 1] <= c * static_cast<double>(k) / m) {
            return k;
        }
    }
    return 0;
}

DecisionSet reject_below(const Dataset& y, const std::vector<double>& p, double alpha) {
    DecisionSet d = empty_decisions(y.size());
    d.alpha = alpha;
    if (alpha <= 0.0) {
        return d;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (p[i] <= alpha) {
            d.rejected[i] = 1;
            d.sign[i] = sign_of(y[i]);
        }
    }
    return d;
}

DecisionSet step_up_procedure(const Dataset& y, double c) {
    const std::vector<double> p = p_values(y);
    const std::size_t k = step_up(p, c);
    return reject_below(y, p, c * static_cast<double>(k) / static_cast<double>(y.size()));
}

} // namespace

DecisionSet decide(const Dataset& y, const AcceptanceRegion& region) {
    DecisionSet d = empty_decisions(y.size());
    d.alpha = region.alpha();
    if (!region.is_symmetric()) {
        d.region = region;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < region.lower()) {
            d.rejected[i] = 1;
            d.sign[i] = -1;
        } else if (y[i] > region.upper()) {
            d.rejected[i] = 1;
            d.sign[i] = 1;
        }
    }
    return d;
}

DecisionSet by_procedure(const Dataset& y, double alpha_s) {
    require_level(alpha_s, 1.0, "by_procedure");
    return step_up_procedure(y, alpha_s);
}

DecisionSet lc_procedure(const Dataset& y, double alpha_s) {
    require_level(alpha_s, 0.5, "lc_procedure");
    return step_up_procedure(y, 2.0 * alpha_s);
}

DecisionSet nlc_procedure(const Dataset& y, double alpha_s) {
    require_level(alpha_s, 0.5, "nlc_procedure");
    const std::size_t m = y.size();
    DecisionSet d = empty_decisions(m);
    d.per_experiment_alpha.assign(m, 0.0);
    if (m < 2) {
        return d;
    }
    const std::vector<double> p = p_values(y);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> sorted(m);
    for (std::size_t r = 0; r < m; ++r) {
        sorted[r] = p[order[r]];
    }

    // Removing the experiment at 1-based rank r leaves the others' k-th order
    // statistic at sorted[k-1] for k < r and at sorted[k] for k >= r. The
    // leave-one-out step-up condition is q_(k) <= c (k - 1) / m.
    const double c = 2.0 * alpha_s;
    const double md = static_cast<double>(m);
    auto threshold = [&](std::size_t k) { return c * static_cast<double>(k - 1) / md; };

    std::size_t max_after = 0; // largest k in [1, m-1] with sorted[k] <= threshold(k)
    for (std::size_t k = m - 1; k >= 1; --k) {
        if (sorted[k] <= threshold(k)) {
            max_after = k;
            break;
        }
    }
    // best_before[j] = largest k <= j with sorted[k-1] <= threshold(k).
    std::vector<std::size_t> best_before(m, 0);
    for (std::size_t k = 1; k < m; ++k) {
        best_before[k] = sorted[k - 1] <= threshold(k) ? k : best_before[k - 1];
    }

    for (std::size_t r = 1; r <= m; ++r) {
        const std::size_t i = order[r - 1];
        const std::size_t k = max_after >= r ? max_after : best_before[r - 1];
        const double alpha_i = k >= 1 ? threshold(k) : 0.0;
        d.per_experiment_alpha[i] = alpha_i;
        if (alpha_i > 0.0 && p[i] <= alpha_i) {
            d.rejected[i] = 1;
            d.sign[i] = sign_of(y[i]);
        }
    }
    return d;
}

AlphaSolution solve_alpha(const EffectDistribution& g, double alpha_s, double s, const RateOptions& opts) {
    auto excess = [&](double log_alpha) {
        return rate_triple(g, AcceptanceRegion(std::exp(log_alpha), s), opts).mser - alpha_s;
    };
    const double lo = std::log(kAlphaFloor);
    const double hi = std::log(kAlphaCeiling);
    const double at_hi = excess(hi);
    if (at_hi <= 0.0) {
        return {kAlphaCeiling, AlphaCap::upper};
    }
    const double at_lo = excess(lo);
    if (at_lo >= 0.0) {
        return {kAlphaFloor, AlphaCap::lower};
    }
    const double root = find_root(excess, Interval(lo, hi), 1e-10);
    return {std::exp(root), AlphaCap::none};
}

AlphaSolution tco_alpha(const EffectDistribution& g, double alpha_s) {
    require_level(alpha_s, 0.5, "tco_alpha");
    return solve_alpha(g, alpha_s, 0.5);
}

DecisionSet tight_control(const Dataset& y, const EffectDistribution& g, double alpha_s) {
    const AlphaSolution sol = tco_alpha(g, alpha_s);
    DecisionSet d = decide(y, AcceptanceRegion::symmetric(sol.alpha));
    d.cap = sol.cap;
    return d;
}

DecisionSet tce_procedure(const Dataset& y, double alpha_s) {
    require_level(alpha_s, 0.5, "tce_procedure");
    ALDParams fitted;
    std::string warning;
    try {
        fitted = fit_ald_moments(y);
    } catch (const DegenerateFitError& e) {
        fitted = e.fallback();
        warning = e.what();
    }
    DecisionSet d = tight_control(y, AsymmetricLaplace(fitted), alpha_s);
    d.warning = std::move(warning);
    return d;
}

SplitOptimum optimize_s(const EffectDistribution& g, double alpha, SplitObjective objective,
                        const RateOptions& opts) {
    auto score = [&](double s) {
        const RateTriple r = rate_triple(g, AcceptanceRegion(alpha, s), opts);
        return objective == SplitObjective::maximize_msdr ? r.msdr : -r.mser;
    };
    const ScalarOptimum best = maximize_scalar(score, Interval(0.0, 1.0), 1e-4);
    return {best.argmax, rate_triple(g, AcceptanceRegion(alpha, best.argmax), opts)};
}

namespace {

constexpr int kJointAlphaGrid = 64;
constexpr int kJointSplitGrid = 33;
constexpr double kJointAlphaMin = 1e-8;

} // namespace

JointOptimum joint_optimize(const EffectDistribution& g, double alpha_s, const RateOptions& opts) {
    require_level(alpha_s, 0.5, "joint_optimize");

    // Coarse grid on (log alpha, s).
    const double log_lo = std::log(kJointAlphaMin);
    const double log_hi = std::log(kAlphaCeiling);
    std::optional<JointOptimum> best;
    for (int j = 0; j < kJointAlphaGrid; ++j) {
        const double alpha = std::exp(log_lo + (log_hi - log_lo) * j / (kJointAlphaGrid - 1));
        for (int k = 1; k <= kJointSplitGrid; ++k) {
            const double s = static_cast<double>(k) / (kJointSplitGrid + 1);
            const RateTriple r = rate_triple(g, AcceptanceRegion(alpha, s), opts);
            if (r.mser <= alpha_s && (!best || r.msdr > best->rates.msdr)) {
                best = JointOptimum{alpha, s, r};
            }
        }
    }
    if (!best) {
        throw InfeasibleError("joint_optimize: no grid point has MSER <= " + std::to_string(alpha_s) + " for " +
                              g.describe() + "; alpha_s is too small for this effect distribution");
    }

    // MSDR grows with alpha at fixed s, so along s the constrained optimum
    // sits on the boundary MSER = alpha_s. Refine s on that profile.
    auto profile = [&](double s) -> std::pair<double, JointOptimum> {
        const AlphaSolution sol = solve_alpha(g, alpha_s, s, opts);
        const RateTriple r = rate_triple(g, AcceptanceRegion(sol.alpha, s), opts);
        if (sol.cap == AlphaCap::lower || r.mser > alpha_s + 1e-9) {
            return {-1.0, JointOptimum{sol.alpha, s, r}};
        }
        return {r.msdr, JointOptimum{sol.alpha, s, r}};
    };

    double center = best->s;
    double half_width = 2.0 / (kJointSplitGrid + 1);
    for (double tol : {1e-3, 1e-5}) {
        const double lo = std::max(center - half_width, 1e-6);
        const double hi = std::min(center + half_width, 1.0 - 1e-6);
        const ScalarOptimum refined =
            maximize_scalar([&](double s) { return profile(s).first; }, Interval(lo, hi), tol);
        const auto [value, point] = profile(refined.argmax);
        if (value > best->rates.msdr) {
            best = point;
        }
        center = best->s;
        half_width = 4.0 * tol;
    }
    return *best;
}

} // namespace signgate
