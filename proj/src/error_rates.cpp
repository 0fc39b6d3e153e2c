#include "signgate/error_rates.hpp"

#include <algorithm>
#include <vector>

namespace signgate {

AcceptanceRegion::AcceptanceRegion(double alpha, double s) : alpha_(alpha), s_(s) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("AcceptanceRegion: alpha must lie in (0, 1)");
    }
    if (!(s > 0.0 && s < 1.0)) {
        throw std::invalid_argument("AcceptanceRegion: s must lie in (0, 1)");
    }
    lower_ = std_normal_quantile(alpha * s);
    // Phi^{-1}(1 - a) = -Phi^{-1}(a), evaluated on the small tail for accuracy.
    upper_ = -std_normal_quantile(alpha * (1.0 - s));
}

double reject_low_prob(double theta, const AcceptanceRegion& region, double noise_sd) {
    return std_normal_cdf(region.lower() - theta / noise_sd);
}

double reject_high_prob(double theta, const AcceptanceRegion& region, double noise_sd) {
    return std_normal_cdf(theta / noise_sd - region.upper());
}

RateTriple rate_triple(const EffectDistribution& g, const AcceptanceRegion& region, const RateOptions& opts) {
    const Interval support = g.mass_interval();
    const std::vector<double> kinks = g.kink_points();
    QuadratureOptions q;
    q.rel_tol = opts.rel_tol;
    q.abs_tol = 1e-300;

    const double sd = opts.noise_sd;
    double wrong = 0.0;
    double discoveries = 0.0;
    // theta > 0: wrong sign when Y falls below the region.
    if (support.hi() > 0.0) {
        const Interval pos(std::max(support.lo(), 0.0), support.hi());
        wrong += integrate([&](double t) { return reject_low_prob(t, region, sd) * g.density(t); }, pos, q, kinks);
        discoveries += integrate(
            [&](double t) {
                return (reject_low_prob(t, region, sd) + reject_high_prob(t, region, sd)) * g.density(t);
            },
            pos, q, kinks);
    }
    if (support.lo() < 0.0) {
        const Interval neg(support.lo(), std::min(support.hi(), 0.0));
        wrong += integrate([&](double t) { return reject_high_prob(t, region, sd) * g.density(t); }, neg, q, kinks);
        discoveries += integrate(
            [&](double t) {
                return (reject_low_prob(t, region, sd) + reject_high_prob(t, region, sd)) * g.density(t);
            },
            neg, q, kinks);
    }
    if (!(discoveries >= 1e-300)) {
        throw DegenerateRegionError("rate_triple: discovery rate underflowed for " + g.describe());
    }
    // Keep mser * msdr == gamma exact by deriving gamma from the stored ratio.
    const double mser = wrong / discoveries;
    return {mser, discoveries, mser * discoveries};
}

double lemma_bound(const AcceptanceRegion& region, double pi0) {
    const double a = region.alpha();
    const double s = region.s();
    return a * s * pi0 + a * (1.0 - s) * (1.0 - pi0);
}

} // namespace signgate
