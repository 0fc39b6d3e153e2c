#pragma once

#include "signgate/distributions.hpp"

namespace signgate {

/// Acceptance region A(alpha, s) = (Phi^{-1}(alpha s), Phi^{-1}(1 - alpha (1 - s)))
/// in z units. s splits the type I error between the lower and upper tail;
/// s = 1/2 is the usual symmetric two-sided test.
class AcceptanceRegion {
public:
    AcceptanceRegion(double alpha, double s);

    static AcceptanceRegion symmetric(double alpha) { return {alpha, 0.5}; }

    double alpha() const { return alpha_; }
    double s() const { return s_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    bool is_symmetric() const { return s_ == 0.5; }

private:
    double alpha_;
    double s_;
    double lower_;
    double upper_;
};

/// Pr(Y/sigma < lower | theta): the chance of declaring a negative sign.
double reject_low_prob(double theta, const AcceptanceRegion& region, double noise_sd = 1.0);
/// Pr(Y/sigma > upper | theta): the chance of declaring a positive sign.
double reject_high_prob(double theta, const AcceptanceRegion& region, double noise_sd = 1.0);

struct RateTriple {
    double mser;  ///< Pr(sign error | rejection)
    double msdr;  ///< Pr(rejection)
    double gamma; ///< Pr(sign error and rejection)
};

class DegenerateRegionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct RateOptions {
    double noise_sd = 1.0;
    double rel_tol = 1e-9;
};

/// Marginal sign error and discovery rates of `region` under the hierarchical
/// model theta ~ G, Y | theta ~ N(theta, noise_sd^2), by quadrature against
/// G's density split at zero and at G's kinks.
RateTriple rate_triple(const EffectDistribution& g, const AcceptanceRegion& region,
                       const RateOptions& opts = {});

/// alpha s pi0 + alpha (1 - s)(1 - pi0): an upper bound on gamma for any
/// atomless G with Pr(theta > 0) = pi0.
double lemma_bound(const AcceptanceRegion& region, double pi0);

} // namespace signgate
