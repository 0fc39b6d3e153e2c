#pragma once

#include "signgate/distributions.hpp"
#include "signgate/error_rates.hpp"
#include "signgate/procedures.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace signgate {

enum class Procedure { by, lc, nlc, tco, tcea };

std::string_view procedure_name(Procedure p);
/// Accepts BY, LC, NLC, TCO, TCEA (case-insensitive; TCE is an alias of TCEA).
Procedure parse_procedure(std::string_view name);

/// One simulated design point: m experiments with effects from `effect`.
struct Scenario {
    std::string id;
    std::size_t m = 5000;
    std::size_t replicates = 1000;
    EffectPtr effect;
    double alpha_s = 0.1;
    std::vector<Procedure> procedures;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct ProcedureOutcome {
    std::size_t signs = 0;  ///< R
    std::size_t errors = 0; ///< E
    double sep = 0.0;       ///< E / (R v 1)
    double alpha = 0.0;
};

struct ReplicateResult {
    std::vector<ProcedureOutcome> outcomes; ///< aligned with Scenario::procedures
    /// BY subset of LC and NLC subset of LC on this dataset; true when the
    /// pair was not requested.
    bool dominance_ok = true;
};

/// Sign errors #{i : S_i sign(theta_i) = -1}.
std::size_t count_sign_errors(const DecisionSet& d, std::span<const double> theta);

/// Draws theta and Y for one replicate from the seed derived from
/// (master_seed, replicate_index) and applies every requested procedure.
/// `tco` carries a precomputed oracle alpha; it is solved on the spot when absent.
ReplicateResult run_replicate(const Scenario& scenario, std::size_t replicate_index,
                              std::optional<AlphaSolution> tco = std::nullopt);

struct ProcedureSummary {
    Procedure procedure;
    double mean_sep = 0.0;
    double se_sep = 0.0;
    double mean_signs = 0.0;
    double se_signs = 0.0;
    double mean_alpha = 0.0;
    std::size_t replicates = 0;
};

struct ScenarioReport {
    std::string scenario_id;
    std::vector<ProcedureSummary> procedures;
    std::size_t dominance_violations = 0;
    std::optional<AlphaSolution> tco;

    const ProcedureSummary& at(Procedure p) const;
};

/// Runs every replicate (on up to `workers` threads) and aggregates in
/// replicate order, so the report does not depend on scheduling.
ScenarioReport run_scenario(const Scenario& scenario, unsigned workers = 1);

/// tau such that the plain alpha = 0.05 test has MSER equal to `target_mser`
/// under ALD(0, tau, q).
double calibrate_ald_tau(double q, double target_mser, double alpha = 0.05);

/// Five equally spaced tau values spanning MSER 30% down to 10% at alpha = 0.05.
std::vector<double> auto_tau_grid(double q, std::size_t points = 5);

struct Lemma1Result {
    double statistic;
    double p_value;
    std::size_t conditioned_samples;
    std::size_t bins;
    double mser;
};

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulates `trials` datasets of size m with a fixed region, keeps those
/// with exactly r rejections and tests the sign-error counts against
/// Binomial(r, MSER) with a chi-square goodness-of-fit statistic.
Lemma1Result lemma1_diagnostic(const EffectDistribution& g, const AcceptanceRegion& region, std::size_t m,
                               std::size_t r, std::size_t trials, std::uint64_t seed);

struct Prop1Row {
    std::size_t m;
    double mean_abs_deviation; ///< mean |SEP - MSER|
    double sep_variance;
};

std::vector<Prop1Row> prop1_diagnostic(const EffectDistribution& g, const AcceptanceRegion& region,
                                       const std::vector<std::size_t>& m_grid, std::size_t replicates,
                                       std::uint64_t seed);

} // namespace signgate
