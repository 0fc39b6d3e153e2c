#include "signgate/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace signgate {

std::string_view procedure_name(Procedure p) {
    switch (p) {
    case Procedure::by:
        return "BY";
    case Procedure::lc:
        return "LC";
    case Procedure::nlc:
        return "NLC";
    case Procedure::tco:
        return "TCO";
    case Procedure::tcea:
        return "TCEA";
    }
    return "?";
}

Procedure parse_procedure(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "BY") {
        return Procedure::by;
    }
    if (upper == "LC") {
        return Procedure::lc;
    }
    if (upper == "NLC") {
        return Procedure::nlc;
    }
    if (upper == "TCO") {
        return Procedure::tco;
    }
    if (upper == "TCEA" || upper == "TCE") {
        return Procedure::tcea;
    }
    throw std::invalid_argument("unknown procedure '" + std::string(name) + "'");
}

void Scenario::validate() const {
    if (m < 1) {
        throw std::invalid_argument("scenario " + id + ": m must be >= 1");
    }
    if (replicates < 1) {
        throw std::invalid_argument("scenario " + id + ": replicates must be >= 1");
    }
    if (!(alpha_s > 0.0 && alpha_s < 0.5)) {
        throw std::invalid_argument("scenario " + id + ": alpha_s must lie in (0, 0.5)");
    }
    if (!effect) {
        throw std::invalid_argument("scenario " + id + ": missing effect distribution");
    }
    if (procedures.empty()) {
        throw std::invalid_argument("scenario " + id + ": no procedures requested");
    }
}

std::size_t count_sign_errors(const DecisionSet& d, std::span<const double> theta) {
    std::size_t errors = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const int truth = (theta[i] > 0.0) - (theta[i] < 0.0);
        if (d.sign[i] * truth == -1) {
            ++errors;
        }
    }
    return errors;
}

namespace {

bool subset(const DecisionSet& inner, const DecisionSet& outer) {
    for (std::size_t i = 0; i < inner.rejected.size(); ++i) {
        if (inner.rejected[i] && !outer.rejected[i]) {
            return false;
        }
    }
    return true;
}

struct Draw {
    std::vector<double> theta;
    std::vector<double> y;
};

Draw draw(const EffectDistribution& g, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    Draw d;
    d.theta = g.sample(rng, m);
    d.y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        d.y[i] = d.theta[i] + rng.normal();
    }
    return d;
}

} // namespace

ReplicateResult run_replicate(const Scenario& scenario, std::size_t replicate_index,
                              std::optional<AlphaSolution> tco) {
    const Draw sample = draw(*scenario.effect, scenario.m, derive_seed(scenario.master_seed, replicate_index));
    const Dataset y(sample.y);

    ReplicateResult result;
    std::optional<DecisionSet> by;
    std::optional<DecisionSet> lc;
    std::optional<DecisionSet> nlc;
    for (Procedure p : scenario.procedures) {
        DecisionSet d;
        switch (p) {
        case Procedure::by:
            d = by_procedure(y, scenario.alpha_s);
            by = d;
            break;
        case Procedure::lc:
            d = lc_procedure(y, scenario.alpha_s);
            lc = d;
            break;
        case Procedure::nlc:
            d = nlc_procedure(y, scenario.alpha_s);
            nlc = d;
            break;
        case Procedure::tco: {
            const AlphaSolution sol = tco ? *tco : tco_alpha(*scenario.effect, scenario.alpha_s);
            d = decide(y, AcceptanceRegion::symmetric(sol.alpha));
            d.cap = sol.cap;
            break;
        }
        case Procedure::tcea:
            d = tce_procedure(y, scenario.alpha_s);
            break;
        }
        ProcedureOutcome out;
        out.signs = d.rejections();
        out.errors = count_sign_errors(d, sample.theta);
        out.sep = static_cast<double>(out.errors) / static_cast<double>(std::max<std::size_t>(out.signs, 1));
        out.alpha = d.alpha;
        result.outcomes.push_back(out);
    }
    if (lc) {
        result.dominance_ok = (!by || subset(*by, *lc)) && (!nlc || subset(*nlc, *lc));
    }
    return result;
}

const ProcedureSummary& ScenarioReport::at(Procedure p) const {
    for (const auto& s : procedures) {
        if (s.procedure == p) {
            return s;
        }
    }
    throw std::out_of_range("scenario report has no " + std::string(procedure_name(p)) + " row");
}

namespace {

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    const double mean = sum / n;
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

template <class Work>
void parallel_for(std::size_t count, unsigned workers, Work&& work) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            work(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace

ScenarioReport run_scenario(const Scenario& scenario, unsigned workers) {
    scenario.validate();
    ScenarioReport report;
    report.scenario_id = scenario.id;
    if (std::find(scenario.procedures.begin(), scenario.procedures.end(), Procedure::tco) !=
        scenario.procedures.end()) {
        report.tco = tco_alpha(*scenario.effect, scenario.alpha_s);
    }

    std::vector<ReplicateResult> results(scenario.replicates);
    parallel_for(scenario.replicates, workers,
                 [&](std::size_t i) { results[i] = run_replicate(scenario, i, report.tco); });

    for (std::size_t k = 0; k < scenario.procedures.size(); ++k) {
        std::vector<double> seps;
        std::vector<double> signs;
        double alpha_sum = 0.0;
        for (const auto& r : results) {
            seps.push_back(r.outcomes[k].sep);
            signs.push_back(static_cast<double>(r.outcomes[k].signs));
            alpha_sum += r.outcomes[k].alpha;
        }
        const MeanSe sep = mean_se(seps);
        const MeanSe sg = mean_se(signs);
        report.procedures.push_back({scenario.procedures[k], sep.mean, sep.se, sg.mean, sg.se,
                                     alpha_sum / static_cast<double>(results.size()), results.size()});
    }
    for (const auto& r : results) {
        report.dominance_violations += r.dominance_ok ? 0 : 1;
    }
    return report;
}

double calibrate_ald_tau(double q, double target_mser, double alpha) {
    const AcceptanceRegion region = AcceptanceRegion::symmetric(alpha);
    auto excess = [&](double log_tau) {
        return rate_triple(AsymmetricLaplace({0.0, std::exp(log_tau), q}), region).mser - target_mser;
    };
    return std::exp(find_root(excess, Interval(std::log(1e-4), std::log(100.0)), 1e-10));
}

std::vector<double> auto_tau_grid(double q, std::size_t points) {
    const double small = calibrate_ald_tau(q, 0.3);
    const double large = calibrate_ald_tau(q, 0.1);
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = points == 1 ? small : small + (large - small) * static_cast<double>(i) / (points - 1);
    }
    return grid;
}

Lemma1Result lemma1_diagnostic(const EffectDistribution& g, const AcceptanceRegion& region, std::size_t m,
                               std::size_t r, std::size_t trials, std::uint64_t seed) {
    if (r < 1) {
        throw std::invalid_argument("lemma1_diagnostic: r must be >= 1");
    }
    if (r > m) {
        throw std::invalid_argument("lemma1_diagnostic: r cannot exceed m");
    }
    std::vector<std::size_t> observed(r + 1, 0);
    std::size_t kept = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Draw sample = draw(g, m, derive_seed(seed, t));
        const DecisionSet d = decide(Dataset(sample.y), region);
        if (d.rejections() != r) {
            continue;
        }
        ++observed[count_sign_errors(d, sample.theta)];
        ++kept;
    }
    if (kept < 100) {
        throw InsufficientDataError("lemma1_diagnostic: only " + std::to_string(kept) +
                                    " datasets had exactly r rejections (need 100)");
    }

    const double mser = rate_triple(g, region).mser;
    const boost::math::binomial_distribution<double> binom(static_cast<double>(r), mser);
    std::vector<double> expected(r + 1);
    for (std::size_t k = 0; k <= r; ++k) {
        expected[k] = static_cast<double>(kept) * boost::math::pdf(binom, static_cast<double>(k));
        if (expected[k] == 0.0 && observed[k] > 0) {
            return {std::numeric_limits<double>::infinity(), 0.0, kept, 0, mser};
        }
    }

    // Pool adjacent categories until each expected count reaches 5.
    std::vector<double> bin_expected;
    std::vector<double> bin_observed;
    double e_acc = 0.0;
    double o_acc = 0.0;
    for (std::size_t k = 0; k <= r; ++k) {
        e_acc += expected[k];
        o_acc += static_cast<double>(observed[k]);
        if (e_acc >= 5.0) {
            bin_expected.push_back(e_acc);
            bin_observed.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (bin_expected.empty()) {
            bin_expected.push_back(e_acc);
            bin_observed.push_back(o_acc);
        } else {
            bin_expected.back() += e_acc;
            bin_observed.back() += o_acc;
        }
    }
    if (bin_expected.size() < 2) {
        return {0.0, 1.0, kept, bin_expected.size(), mser};
    }
    double stat = 0.0;
    for (std::size_t b = 0; b < bin_expected.size(); ++b) {
        const double diff = bin_observed[b] - bin_expected[b];
        stat += diff * diff / bin_expected[b];
    }
    const double df = static_cast<double>(bin_expected.size() - 1);
    return {stat, boost::math::gamma_q(0.5 * df, 0.5 * stat), kept, bin_expected.size(), mser};
}

std::vector<Prop1Row> prop1_diagnostic(const EffectDistribution& g, const AcceptanceRegion& region,
                                       const std::vector<std::size_t>& m_grid, std::size_t replicates,
                                       std::uint64_t seed) {
    if (m_grid.empty()) {
        throw std::invalid_argument("prop1_diagnostic: m_grid is empty");
    }
    if (replicates < 2) {
        throw std::invalid_argument("prop1_diagnostic: need at least two replicates");
    }
    const double mser = rate_triple(g, region).mser;
    std::vector<Prop1Row> rows;
    for (std::size_t m : m_grid) {
        const std::uint64_t m_seed = derive_seed(seed, m);
        std::vector<double> seps(replicates);
        for (std::size_t rep = 0; rep < replicates; ++rep) {
            const Draw sample = draw(g, m, derive_seed(m_seed, rep));
            const DecisionSet d = decide(Dataset(sample.y), region);
            const std::size_t signs = d.rejections();
            seps[rep] = static_cast<double>(count_sign_errors(d, sample.theta)) /
                        static_cast<double>(std::max<std::size_t>(signs, 1));
        }
        double mean = 0.0;
        double dev = 0.0;
        for (double s : seps) {
            mean += s;
            dev += std::abs(s - mser);
        }
        mean /= static_cast<double>(replicates);
        double var = 0.0;
        for (double s : seps) {
            var += (s - mean) * (s - mean);
        }
        rows.push_back({m, dev / static_cast<double>(replicates), var / static_cast<double>(replicates - 1)});
    }
    return rows;
}

} // namespace signgate
