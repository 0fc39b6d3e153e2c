#include <doctest.h>

#include "signgate/simulation.hpp"

#include <cmath>
#include <memory>
#include <set>

using namespace signgate;

namespace {

Scenario small_scenario(std::uint64_t seed, std::size_t replicates = 12) {
    Scenario s;
    s.id = "small";
    s.m = 400;
    s.replicates = replicates;
    s.effect = std::make_shared<AsymmetricLaplace>(ALDParams{0.0, 0.4, 0.3});
    s.alpha_s = 0.1;
    s.procedures = {Procedure::by, Procedure::lc, Procedure::nlc, Procedure::tco, Procedure::tcea};
    s.master_seed = seed;
    return s;
}

bool same(const ReplicateResult& a, const ReplicateResult& b) {
    if (a.outcomes.size() != b.outcomes.size() || a.dominance_ok != b.dominance_ok) return false;
    for (std::size_t k = 0; k < a.outcomes.size(); ++k) {
        const auto& x = a.outcomes[k];
        const auto& y = b.outcomes[k];
        if (x.signs != y.signs || x.errors != y.errors || x.sep != y.sep || x.alpha != y.alpha) return false;
    }
    return true;
}

} // namespace

TEST_CASE("procedure names") {
    CHECK(parse_procedure("BY") == Procedure::by);
    CHECK(parse_procedure("lc") == Procedure::lc);
    CHECK(parse_procedure("Nlc") == Procedure::nlc);
    CHECK(parse_procedure("TCO") == Procedure::tco);
    CHECK(parse_procedure("TCEA") == Procedure::tcea);
    CHECK(parse_procedure("tce") == Procedure::tcea);
    CHECK(procedure_name(Procedure::tcea) == "TCEA");
    CHECK_THROWS_AS(parse_procedure("BH"), std::invalid_argument);
}

TEST_CASE("seed derivation") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100000; ++i) seen.insert(derive_seed(20190417, i));
    CHECK(seen.size() == 100000);
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("Rng") {
    Rng a(1), b(1), c(2);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        CHECK(u == b.uniform());
    }
    CHECK(a.normal() != c.normal());
}

TEST_CASE("Scenario validation") {
    Scenario s = small_scenario(1);
    CHECK_NOTHROW(s.validate());
    s.alpha_s = 0.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_scenario(1);
    s.replicates = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_scenario(1);
    s.effect = nullptr;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_scenario(1);
    s.procedures.clear();
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("count_sign_errors") {
    const Dataset y({6.0, 7.0, -8.0, 5.5});
    const std::vector<double> theta = {5.2, 6.1, -7.7, 6.0};
    const DecisionSet d = decide(y, AcceptanceRegion::symmetric(0.05));
    CHECK(d.rejections() == 4);
    CHECK(count_sign_errors(d, theta) == 0);
    const std::vector<double> flipped = {-1.0, 6.1, 2.0, 6.0};
    CHECK(count_sign_errors(d, flipped) == 2);
}

TEST_CASE("run_replicate") {
    const Scenario s = small_scenario(99);
    const ReplicateResult a = run_replicate(s, 3);
    const ReplicateResult b = run_replicate(s, 3);
    CHECK(same(a, b));
    CHECK_FALSE(same(a, run_replicate(s, 4)));
    CHECK(a.dominance_ok);
    for (const auto& o : a.outcomes) {
        CHECK(o.errors <= o.signs);
        CHECK(o.signs <= s.m);
        CHECK(o.sep >= 0.0);
        CHECK(o.sep <= 1.0);
        if (o.signs == 0) CHECK(o.sep == 0.0);
    }

    SUBCASE("precomputed oracle alpha gives the same result") {
        const AlphaSolution tco = tco_alpha(*s.effect, s.alpha_s);
        CHECK(same(a, run_replicate(s, 3, tco)));
    }
    SUBCASE("large effects produce no sign errors") {
        Scenario big = small_scenario(5);
        big.effect = std::make_shared<AsymmetricLaplace>(ALDParams{10.0, 0.2, 0.5});
        big.procedures = {Procedure::by, Procedure::lc, Procedure::nlc, Procedure::tco};
        const ReplicateResult r = run_replicate(big, 0);
        for (const auto& o : r.outcomes) {
            CHECK(o.errors == 0);
            CHECK(o.signs > 0);
        }
    }
}

TEST_CASE("run_scenario does not depend on the worker count") {
    const Scenario s = small_scenario(7, 16);
    const ScenarioReport one = run_scenario(s, 1);
    const ScenarioReport four = run_scenario(s, 4);
    REQUIRE(one.procedures.size() == four.procedures.size());
    for (std::size_t k = 0; k < one.procedures.size(); ++k) {
        CHECK(one.procedures[k].mean_sep == four.procedures[k].mean_sep);
        CHECK(one.procedures[k].se_sep == four.procedures[k].se_sep);
        CHECK(one.procedures[k].mean_signs == four.procedures[k].mean_signs);
        CHECK(one.procedures[k].se_signs == four.procedures[k].se_signs);
        CHECK(one.procedures[k].replicates == 16);
    }
    CHECK(one.dominance_violations == 0);
    CHECK(one.at(Procedure::lc).mean_signs >= one.at(Procedure::by).mean_signs);
    CHECK(one.tco.has_value());

    SUBCASE("standard errors are sample SD over root n") {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i = 0; i < s.replicates; ++i) {
            const double sep = run_replicate(s, i).outcomes[1].sep;
            sum += sep;
            sum2 += sep * sep;
        }
        const double n = static_cast<double>(s.replicates);
        const double mean = sum / n;
        const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
        CHECK(one.at(Procedure::lc).mean_sep == doctest::Approx(mean).epsilon(1e-12));
        CHECK(one.at(Procedure::lc).se_sep == doctest::Approx(sd / std::sqrt(n)).epsilon(1e-9));
    }
}

TEST_CASE("tau calibration") {
    for (double q : {0.1, 0.3, 0.5}) {
        for (double target : {0.1, 0.3}) {
            const double tau = calibrate_ald_tau(q, target);
            const AsymmetricLaplace g({0.0, tau, q});
            CHECK(rate_triple(g, AcceptanceRegion::symmetric(0.05)).mser == doctest::Approx(target).epsilon(1e-6));
        }
        const auto grid = auto_tau_grid(q);
        REQUIRE(grid.size() == 5);
        CHECK(grid.front() == doctest::Approx(calibrate_ald_tau(q, 0.3)));
        CHECK(grid.back() == doctest::Approx(calibrate_ald_tau(q, 0.1)));
        for (std::size_t i = 1; i < grid.size(); ++i) {
            CHECK(grid[i] - grid[i - 1] == doctest::Approx(grid[1] - grid[0]).epsilon(1e-9));
        }
    }
    // scipy reference for the q = 0.5 endpoints
    CHECK(calibrate_ald_tau(0.5, 0.3) == doctest::Approx(0.0908).epsilon(2e-3));
    CHECK(calibrate_ald_tau(0.5, 0.1) == doctest::Approx(0.2551).epsilon(2e-3));
}

TEST_CASE("lemma1_diagnostic") {
    const AsymmetricLaplace g({0.0, 0.5, 0.3});
    const AcceptanceRegion region = AcceptanceRegion::symmetric(0.2);

    SUBCASE("binomial fit") {
        const Lemma1Result r = lemma1_diagnostic(g, region, 20, 6, 4000, 12345);
        CHECK(r.conditioned_samples >= 100);
        CHECK(r.bins >= 2);
        CHECK(r.p_value > 0.001);
        CHECK(r.mser == doctest::Approx(rate_triple(g, region).mser));
    }
    SUBCASE("no sign errors when effects are huge") {
        const AsymmetricLaplace huge({20.0, 0.5, 0.5});
        const Lemma1Result r = lemma1_diagnostic(huge, AcceptanceRegion::symmetric(0.05), 20, 20, 200, 1);
        CHECK(r.conditioned_samples == 200);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(lemma1_diagnostic(g, region, 20, 0, 1000, 1), std::invalid_argument);
        CHECK_THROWS_AS(lemma1_diagnostic(g, region, 20, 21, 1000, 1), std::invalid_argument);
        CHECK_THROWS_AS(lemma1_diagnostic(g, region, 20, 19, 50, 1), InsufficientDataError);
    }
}

TEST_CASE("prop1_diagnostic") {
    const AsymmetricLaplace g({0.0, 0.3, 0.3});
    const AcceptanceRegion region = AcceptanceRegion::symmetric(0.05);
    const auto rows = prop1_diagnostic(g, region, {100, 1000, 10000}, 100, 8);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].sep_variance > rows[1].sep_variance);
    CHECK(rows[1].sep_variance > rows[2].sep_variance);
    CHECK(rows[2].mean_abs_deviation < rows[0].mean_abs_deviation);

    SUBCASE("one experiment") {
        const AsymmetricLaplace far({0.0, 3.0, 0.3});
        const auto single = prop1_diagnostic(far, region, {1}, 400, 2);
        // SEP is 0 or 1 per replicate, so its variance is p (1 - p) n / (n - 1) for some p.
        const double v = single[0].sep_variance;
        CHECK(v >= 0.0);
        CHECK(v <= 0.25 * 400.0 / 399.0 + 1e-12);
    }
    CHECK_THROWS_AS(prop1_diagnostic(g, region, {}, 10, 1), std::invalid_argument);
}
