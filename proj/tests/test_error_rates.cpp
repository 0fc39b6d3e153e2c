#include <doctest.h>

#include "signgate/error_rates.hpp"

#include <cmath>
#include <memory>
#include <vector>

using namespace signgate;

namespace {

std::vector<EffectPtr> families() {
    return {
        std::make_shared<AsymmetricLaplace>(ALDParams{0.0, 0.05, 0.1}),
        std::make_shared<AsymmetricLaplace>(ALDParams{0.0, 0.2, 0.5}),
        std::make_shared<SpikeSlab>(SpikeSlabParams{{0.0, 0.1, 0.3}, {Interval(2.0, 4.0)}, 0.01}),
        std::make_shared<SpikeSlab>(
            SpikeSlabParams{{0.0, 0.1, 0.5}, {Interval(-4.0, -2.0), Interval(2.0, 4.0)}, 0.01}),
        std::make_shared<ShiftedChiSquare>(ShiftedChiSqParams{3, 3.0}),
        std::make_shared<Normal>(NormalParams{0.0, 1.0}),
    };
}

} // namespace

TEST_CASE("AcceptanceRegion") {
    const auto sym = AcceptanceRegion::symmetric(0.05);
    CHECK(sym.lower() == doctest::Approx(-1.959963984540054).epsilon(1e-13));
    CHECK(sym.upper() == -sym.lower());
    CHECK(sym.is_symmetric());

    const AcceptanceRegion a(0.05, 0.829);
    CHECK(a.lower() < 0.0);
    CHECK(a.upper() > 0.0);
    // Reference endpoints are printed on twice the z scale. The s = 0.683
    // pair matches to rounding; the s = 0.829 pair is off by about 0.03.
    const AcceptanceRegion d(0.05, 0.683);
    CHECK(std::abs(2.0 * d.lower() - (-3.65)) < 0.006);
    CHECK(std::abs(2.0 * d.upper() - 4.30) < 0.006);
    CHECK(std::abs(2.0 * a.lower() - (-3.45)) < 0.04);
    CHECK(std::abs(2.0 * a.upper() - 4.80) < 0.04);

    CHECK_THROWS_AS(AcceptanceRegion(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(AcceptanceRegion(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(AcceptanceRegion(0.05, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(AcceptanceRegion(0.05, 1.0), std::invalid_argument);
}

TEST_CASE("rejection probabilities") {
    const auto sym = AcceptanceRegion::symmetric(0.05);
    CHECK(reject_low_prob(0.0, sym) == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(reject_high_prob(0.0, sym) == doctest::Approx(0.025).epsilon(1e-12));

    const AcceptanceRegion skew(0.05, 0.683);
    CHECK(reject_low_prob(0.0, skew) == doctest::Approx(0.03415).epsilon(1e-12));
    CHECK(reject_high_prob(0.0, skew) == doctest::Approx(0.01585).epsilon(1e-12));

    // mpmath ncdf(-z - 3) and ncdf(3 - z), z = 1.959963984540054
    CHECK(reject_low_prob(3.0, sym) == doctest::Approx(3.52531251587e-7).epsilon(1e-9));
    CHECK(reject_high_prob(3.0, sym) == doctest::Approx(0.850838415795804).epsilon(1e-12));

    SUBCASE("noise scale") {
        CHECK(reject_high_prob(6.0, sym, 2.0) == doctest::Approx(reject_high_prob(3.0, sym)).epsilon(1e-14));
    }
}

TEST_CASE("rate_triple reproduces the shifted chi-square comparison") {
    const ShiftedChiSquare g({3, 3.0});
    const RateOptions opts{2.0, 1e-10};

    const RateTriple usual = rate_triple(g, AcceptanceRegion::symmetric(0.05), opts);
    CHECK(std::abs(usual.mser - 0.0301) < 0.001);
    CHECK(std::abs(usual.msdr - 0.189) < 0.002);

    const RateTriple disc = rate_triple(g, AcceptanceRegion(0.05, 0.683), opts);
    CHECK(std::abs(disc.mser - 0.0279) < 0.0005);
    CHECK(std::abs(disc.msdr - 0.193) < 0.002);

    const RateTriple err = rate_triple(g, AcceptanceRegion(0.05, 0.829), opts);
    CHECK(std::abs(err.mser - 0.0271) < 0.0005);
    CHECK(std::abs(err.msdr - 0.190) < 0.002);
}

TEST_CASE("rate_triple limits and identities") {
    SUBCASE("effects concentrated at zero") {
        const AsymmetricLaplace g({0.0, 1e-6, 0.5});
        const RateTriple r = rate_triple(g, AcceptanceRegion::symmetric(0.1));
        CHECK(r.mser == doctest::Approx(0.5).epsilon(1e-4));
        CHECK(r.msdr == doctest::Approx(0.1).epsilon(1e-4));
    }
    SUBCASE("large effects make sign errors vanish") {
        const AsymmetricLaplace g({0.0, 5.0, 0.5});
        CHECK(rate_triple(g, AcceptanceRegion::symmetric(0.05)).mser < 0.01);
    }
    SUBCASE("gamma = mser * msdr and ordering") {
        for (const auto& g : families()) {
            for (double s : {0.2, 0.5, 0.8}) {
                const RateTriple r = rate_triple(*g, AcceptanceRegion(0.1, s));
                CHECK(r.gamma == r.mser * r.msdr);
                CHECK(r.gamma >= 0.0);
                CHECK(r.gamma <= r.msdr);
                CHECK(r.msdr <= 1.0);
            }
        }
    }
    SUBCASE("underflowing discovery rate is rejected") {
        const AsymmetricLaplace g({0.0, 1e-3, 0.5});
        CHECK_THROWS_AS(rate_triple(g, AcceptanceRegion::symmetric(1e-305)), DegenerateRegionError);
    }
}

TEST_CASE("lemma_bound") {
    CHECK(lemma_bound(AcceptanceRegion(0.1, 0.5), 0.5) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(lemma_bound(AcceptanceRegion(0.05, 0.683), 0.3916) ==
          doctest::Approx(0.05 * (0.683 * 0.3916 + 0.317 * 0.6084)).epsilon(1e-14));
    CHECK(std::abs(lemma_bound(AcceptanceRegion(0.05, 0.683), 0.3916) - 0.02302) < 1e-5);

    for (const auto& g : families()) {
        INFO(g->describe());
        for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
            for (int k = 1; k <= 9; ++k) {
                const AcceptanceRegion region(alpha, k / 10.0);
                CHECK(rate_triple(*g, region).gamma <= lemma_bound(region, g->prob_positive()) + 1e-9);
            }
        }
    }
}

TEST_CASE("reflection symmetry") {
    const std::vector<EffectPtr> symmetric = {
        std::make_shared<AsymmetricLaplace>(ALDParams{0.0, 0.2, 0.5}),
        std::make_shared<Normal>(NormalParams{0.0, 1.0}),
        std::make_shared<SpikeSlab>(
            SpikeSlabParams{{0.0, 0.1, 0.5}, {Interval(-4.0, -2.0), Interval(2.0, 4.0)}, 0.01}),
    };
    for (const auto& g : symmetric) {
        for (double s : {0.1, 0.3, 0.45}) {
            const RateTriple a = rate_triple(*g, AcceptanceRegion(0.1, s));
            const RateTriple b = rate_triple(*g, AcceptanceRegion(0.1, 1.0 - s));
            CHECK(a.msdr == doctest::Approx(b.msdr).epsilon(1e-8));
            CHECK(a.mser == doctest::Approx(b.mser).epsilon(1e-8));
        }
    }
}

TEST_CASE("mser is nondecreasing in alpha for s = 1/2") {
    for (const auto& g : families()) {
        INFO(g->describe());
        double prev = 0.0;
        for (int k = 1; k <= 60; ++k) {
            const double alpha = std::pow(10.0, -8.0 + 8.0 * k / 60.0) * 0.999;
            const double mser = rate_triple(*g, AcceptanceRegion::symmetric(alpha)).mser;
            CHECK(mser >= prev - 1e-10);
            prev = mser;
        }
    }
}

TEST_CASE("rate_triple agrees with Monte Carlo") {
    struct Case {
        EffectPtr g;
        double alpha;
        double s;
    };
    const std::vector<Case> cases = {
        {std::make_shared<AsymmetricLaplace>(ALDParams{0.0, 0.2, 0.3}), 0.1, 0.5},
        {std::make_shared<ShiftedChiSquare>(ShiftedChiSqParams{3, 3.0}), 0.05, 0.7},
        {std::make_shared<SpikeSlab>(SpikeSlabParams{{0.0, 0.1, 0.3}, {Interval(2.0, 4.0)}, 0.05}), 0.2, 0.4},
    };
    std::uint64_t seed = 77;
    for (const auto& c : cases) {
        const AcceptanceRegion region(c.alpha, c.s);
        const RateTriple r = rate_triple(*c.g, region);
        Rng rng(seed++);
        constexpr int n = 400000;
        long rejected = 0, errors = 0;
        for (int i = 0; i < n; ++i) {
            const double theta = c.g->sample(rng);
            const double y = theta + rng.normal();
            if (y < region.lower()) {
                ++rejected;
                errors += theta > 0.0;
            } else if (y > region.upper()) {
                ++rejected;
                errors += theta < 0.0;
            }
        }
        const double msdr = static_cast<double>(rejected) / n;
        const double mser = static_cast<double>(errors) / rejected;
        INFO(c.g->describe());
        CHECK(std::abs(msdr - r.msdr) < 3.0 * std::sqrt(r.msdr * (1 - r.msdr) / n));
        CHECK(std::abs(mser - r.mser) < 3.0 * std::sqrt(r.mser * (1 - r.mser) / rejected));
    }
}
