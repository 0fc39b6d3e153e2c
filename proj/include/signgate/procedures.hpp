#pragma once

#include "signgate/distributions.hpp"
#include "signgate/error_rates.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace signgate {

/// Which end of the alpha search range a tight-control solve landed on, if any.
enum class AlphaCap {
    none,
    upper, ///< MSER stays below the target everywhere: reject as much as allowed
    lower, ///< MSER exceeds the target everywhere: essentially no rejections
};

/// Per-experiment outcome (R_i, S_i) plus the threshold that produced it.
struct DecisionSet {
    std::vector<std::uint8_t> rejected;
    std::vector<int> sign; ///< -1, 0 or +1; zero exactly when not rejected
    double alpha = 0.0;    ///< the single alpha used (BY, LC, TCO, TCE, fixed)
    std::vector<double> per_experiment_alpha; ///< NLC only
    std::optional<AcceptanceRegion> region;   ///< set when s != 1/2
    AlphaCap cap = AlphaCap::none;
    std::string warning;

    std::size_t rejections() const;
};

/// Two-sided p-value 2 (1 - Phi(|y|)).
double two_sided_p(double y);

DecisionSet decide(const Dataset& y, const AcceptanceRegion& region);

/// Largest alpha with alpha <= alpha_s R(alpha) / m (pure directional FDR).
DecisionSet by_procedure(const Dataset& y, double alpha_s);

/// Loose control: largest alpha with alpha <= 2 alpha_s R(alpha) / m.
DecisionSet lc_procedure(const Dataset& y, double alpha_s);

/// Non-asymptotic loose control: a leave-one-out threshold per experiment,
/// the largest alpha_i with alpha_i <= 2 alpha_s ((R^{-i}(alpha_i) - 1) v 0) / m.
DecisionSet nlc_procedure(const Dataset& y, double alpha_s);

struct AlphaSolution {
    double alpha;
    AlphaCap cap;
};

inline constexpr double kAlphaFloor = 1e-10;
inline constexpr double kAlphaCeiling = 0.999999;

/// Largest alpha whose region A(alpha, s) has MSER equal to alpha_s under G.
AlphaSolution solve_alpha(const EffectDistribution& g, double alpha_s, double s, const RateOptions& opts = {});

/// Tight-control oracle alpha: MSER(alpha, 1/2) = alpha_s under the true G.
AlphaSolution tco_alpha(const EffectDistribution& g, double alpha_s);

/// Symmetric decisions at the tight-control alpha of `g`.
DecisionSet tight_control(const Dataset& y, const EffectDistribution& g, double alpha_s);

/// Tight-control empirical: fit a mu = 0 ALD by moments, then tight control
/// under the fitted model. A degenerate fit falls back to the clamped model
/// and is reported in `warning`.
DecisionSet tce_procedure(const Dataset& y, double alpha_s);

enum class SplitObjective { maximize_msdr, minimize_mser };

struct SplitOptimum {
    double s;
    RateTriple rates;
};

/// Best split s in (0, 1) at fixed alpha.
SplitOptimum optimize_s(const EffectDistribution& g, double alpha, SplitObjective objective,
                        const RateOptions& opts = {});

class InfeasibleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct JointOptimum {
    double alpha;
    double s;
    RateTriple rates;
};

/// Maximize MSDR over (alpha, s) subject to MSER <= alpha_s.
JointOptimum joint_optimize(const EffectDistribution& g, double alpha_s, const RateOptions& opts = {});

} // namespace signgate
