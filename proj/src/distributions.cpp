#include "signgate/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

namespace signgate {

namespace {

// Tail mass left outside mass_interval(), comfortably below 1e-12.
constexpr double kTailMass = 1e-14;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

Dataset::Dataset(std::vector<double> y) : y_(std::move(y)) {
    if (y_.empty()) {
        throw std::invalid_argument("Dataset: at least one observation is required");
    }
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (!std::isfinite(y_[i])) {
            throw std::invalid_argument("Dataset: observation " + std::to_string(i) + " is not finite");
        }
    }
}

double Dataset::mean() const {
    return std::accumulate(y_.begin(), y_.end(), 0.0) / static_cast<double>(y_.size());
}

double Dataset::sample_variance() const {
    if (y_.size() < 2) {
        throw std::invalid_argument("Dataset: sample variance needs at least two observations");
    }
    const double ybar = mean();
    double ss = 0.0;
    for (double v : y_) {
        ss += (v - ybar) * (v - ybar);
    }
    return ss / static_cast<double>(y_.size() - 1);
}

void EffectDistribution::sample(Rng& rng, std::span<double> out) const {
    for (double& v : out) {
        v = sample(rng);
    }
}

std::vector<double> EffectDistribution::sample(Rng& rng, std::size_t n) const {
    std::vector<double> out(n);
    sample(rng, out);
    return out;
}

void ALDParams::validate() const {
    if (!std::isfinite(mu)) {
        throw std::invalid_argument("ALD: mu must be finite");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("ALD: tau must be positive");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("ALD: q must lie in (0, 1)");
    }
}

void SpikeSlabParams::validate() const {
    spike.validate();
    if (!(slab_weight > 0.0 && slab_weight < 1.0)) {
        throw std::invalid_argument("spike-slab: slab_weight must lie in (0, 1)");
    }
    if (slab_intervals.empty()) {
        throw std::invalid_argument("spike-slab: at least one slab interval is required");
    }
    std::vector<Interval> sorted = slab_intervals;
    std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.lo() < b.lo(); });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!sorted[i].finite()) {
            throw std::invalid_argument("spike-slab: slab intervals must be finite");
        }
        if (i > 0 && sorted[i].lo() < sorted[i - 1].hi()) {
            throw std::invalid_argument("spike-slab: slab intervals overlap");
        }
    }
}

void ShiftedChiSqParams::validate() const {
    if (df < 1) {
        throw std::invalid_argument("shifted chi-square: df must be >= 1");
    }
    if (!std::isfinite(shift)) {
        throw std::invalid_argument("shifted chi-square: shift must be finite");
    }
}

void NormalParams::validate() const {
    if (!std::isfinite(mean) || !(sd > 0.0) || !std::isfinite(sd)) {
        throw std::invalid_argument("normal: mean must be finite and sd positive");
    }
}

double ald_density(double theta, const ALDParams& p) {
    const double z = (theta - p.mu) / p.tau;
    const double slope = theta <= p.mu ? p.q - 1.0 : p.q;
    return p.q * (1.0 - p.q) / p.tau * std::exp(-z * slope);
}

Moments ald_moments(const ALDParams& p) {
    const double q = p.q;
    const double mean = p.tau * (1.0 - 2.0 * q) / (q * (1.0 - q));
    const double var = p.tau * p.tau * (1.0 - 2.0 * q + 2.0 * q * q) / ((1.0 - q) * (1.0 - q) * q * q);
    return {p.mu + mean, var};
}

ALDParams fit_ald_moments(const Dataset& y) {
    if (y.size() < 2) {
        throw std::invalid_argument("fit_ald_moments: need at least two observations");
    }
    const double ybar = y.mean();
    const double excess = y.sample_variance() - 1.0;
    if (excess <= kExcessVarianceFloor) {
        throw DegenerateFitError("fit_ald_moments: sample variance " + fmt(excess + 1.0) +
                                     " leaves no excess variance for the effects",
                                 ALDParams{0.0, kTauFloor, 0.5});
    }
    // With x = 1 - 2q the ratio mean^2 / var of the model is x^2 / ((1 + x^2) / 2),
    // so matching mean(Y)^2 / (var(Y) - 1) gives x^2 = c / (2 - c).
    double q = 0.5;
    if (ybar != 0.0) {
        const double c = std::min(ybar * ybar / excess, 1.0);
        const double x = std::copysign(std::sqrt(c / (2.0 - c)), ybar);
        q = std::clamp(0.5 * (1.0 - x), kSkewClamp, 1.0 - kSkewClamp);
    }
    const double tau = std::sqrt(excess) * q * (1.0 - q) / std::sqrt(1.0 - 2.0 * q + 2.0 * q * q);
    return {0.0, tau, q};
}

AsymmetricLaplace::AsymmetricLaplace(ALDParams p) : p_(p) {
    p_.validate();
}

double AsymmetricLaplace::prob_positive() const {
    if (p_.mu >= 0.0) {
        return 1.0 - p_.q * std::exp(-(1.0 - p_.q) * p_.mu / p_.tau);
    }
    return (1.0 - p_.q) * std::exp(p_.q * p_.mu / p_.tau);
}

double AsymmetricLaplace::sample(Rng& rng) const {
    const double u = rng.uniform();
    if (u < p_.q) {
        return p_.mu + p_.tau / (1.0 - p_.q) * std::log(u / p_.q);
    }
    return p_.mu - p_.tau / p_.q * std::log((1.0 - u) / (1.0 - p_.q));
}

Interval AsymmetricLaplace::mass_interval() const {
    const double left = p_.tau / (1.0 - p_.q) * std::log(p_.q / kTailMass);
    const double right = p_.tau / p_.q * std::log((1.0 - p_.q) / kTailMass);
    return {p_.mu - left, p_.mu + right};
}

std::string AsymmetricLaplace::describe() const {
    return "ALD(mu=" + fmt(p_.mu) + ", tau=" + fmt(p_.tau) + ", q=" + fmt(p_.q) + ")";
}

namespace {

SpikeSlabParams checked(SpikeSlabParams p) {
    p.validate();
    return p;
}

} // namespace

SpikeSlab::SpikeSlab(SpikeSlabParams p) : p_(checked(std::move(p))), spike_(p_.spike), slab_length_(0.0) {
    for (const Interval& iv : p_.slab_intervals) {
        slab_length_ += iv.width();
    }
}

double SpikeSlab::density(double theta) const {
    double slab = 0.0;
    for (const Interval& iv : p_.slab_intervals) {
        if (theta >= iv.lo() && theta <= iv.hi()) {
            slab = 1.0 / slab_length_;
            break;
        }
    }
    return (1.0 - p_.slab_weight) * spike_.density(theta) + p_.slab_weight * slab;
}

double SpikeSlab::prob_positive() const {
    double positive = 0.0;
    for (const Interval& iv : p_.slab_intervals) {
        positive += std::max(0.0, iv.hi() - std::max(iv.lo(), 0.0));
    }
    return (1.0 - p_.slab_weight) * spike_.prob_positive() + p_.slab_weight * positive / slab_length_;
}

double SpikeSlab::sample(Rng& rng) const {
    if (rng.uniform() >= p_.slab_weight) {
        return spike_.sample(rng);
    }
    // Interval chosen proportionally to length, then uniform within it.
    double target = rng.uniform() * slab_length_;
    for (const Interval& iv : p_.slab_intervals) {
        if (target < iv.width()) {
            return iv.lo() + target;
        }
        target -= iv.width();
    }
    return p_.slab_intervals.back().hi();
}

std::vector<double> SpikeSlab::kink_points() const {
    std::vector<double> out = spike_.kink_points();
    for (const Interval& iv : p_.slab_intervals) {
        out.push_back(iv.lo());
        out.push_back(iv.hi());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Interval SpikeSlab::mass_interval() const {
    const Interval core = spike_.mass_interval();
    double lo = core.lo();
    double hi = core.hi();
    for (const Interval& iv : p_.slab_intervals) {
        lo = std::min(lo, iv.lo());
        hi = std::max(hi, iv.hi());
    }
    return {lo, hi};
}

std::string SpikeSlab::describe() const {
    std::string slab;
    for (const Interval& iv : p_.slab_intervals) {
        slab += (slab.empty() ? "" : " u ") + std::string("(") + fmt(iv.lo()) + ", " + fmt(iv.hi()) + ")";
    }
    return "SpikeSlab(spike=" + spike_.describe() + ", slab=" + slab + ", w=" + fmt(p_.slab_weight) + ")";
}

ShiftedChiSquare::ShiftedChiSquare(ShiftedChiSqParams p) : p_(p) {
    p_.validate();
    const double k = 0.5 * p_.df;
    log_norm_ = -k * std::log(2.0) - std::lgamma(k);
    prob_positive_ = p_.shift > 0.0 ? boost::math::gamma_q(k, 0.5 * p_.shift) : 1.0;
}

double ShiftedChiSquare::density(double theta) const {
    const double x = theta + p_.shift;
    if (x < 0.0) {
        return 0.0;
    }
    const double k = 0.5 * p_.df;
    if (x == 0.0) {
        if (p_.df == 2) {
            return 0.5;
        }
        return p_.df == 1 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return std::exp(log_norm_ + (k - 1.0) * std::log(x) - 0.5 * x);
}

double ShiftedChiSquare::sample(Rng& rng) const {
    double x = 0.0;
    for (int i = 0; i < p_.df; ++i) {
        const double z = rng.normal();
        x += z * z;
    }
    return x - p_.shift;
}

Interval ShiftedChiSquare::mass_interval() const {
    const double upper = 2.0 * boost::math::gamma_q_inv(0.5 * p_.df, kTailMass);
    return {-p_.shift, upper - p_.shift};
}

std::string ShiftedChiSquare::describe() const {
    return "ChiSq(df=" + std::to_string(p_.df) + ") - " + fmt(p_.shift);
}

Normal::Normal(NormalParams p) : p_(p) {
    p_.validate();
}

double Normal::density(double theta) const {
    return std_normal_pdf((theta - p_.mean) / p_.sd) / p_.sd;
}

double Normal::prob_positive() const {
    return std_normal_cdf(p_.mean / p_.sd);
}

Interval Normal::mass_interval() const {
    return {p_.mean - 8.5 * p_.sd, p_.mean + 8.5 * p_.sd};
}

std::string Normal::describe() const {
    return "N(" + fmt(p_.mean) + ", sd=" + fmt(p_.sd) + ")";
}

namespace {

double number(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        throw std::invalid_argument(where + ": missing key '" + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        throw std::invalid_argument(where + ": key '" + key + "' must be a number");
    }
    return v.get<double>();
}

ALDParams ald_from_json(const nlohmann::json& obj, const std::string& where) {
    if (!obj.is_object()) {
        throw std::invalid_argument(where + ": expected a table");
    }
    ALDParams p{obj.contains("mu") ? number(obj, "mu", where) : 0.0, number(obj, "tau", where),
                number(obj, "q", where)};
    p.validate();
    return p;
}

} // namespace

EffectPtr distribution_from_json(const nlohmann::json& spec) {
    if (!spec.is_object() || spec.size() != 1) {
        throw std::invalid_argument("effect: expected exactly one of ald, spike_slab, shifted_chisq, normal");
    }
    const std::string tag = spec.begin().key();
    const nlohmann::json& body = spec.begin().value();
    if (tag == "ald") {
        return std::make_shared<AsymmetricLaplace>(ald_from_json(body, "effect.ald"));
    }
    if (tag == "spike_slab") {
        if (!body.contains("spike")) {
            throw std::invalid_argument("effect.spike_slab: missing key 'spike'");
        }
        SpikeSlabParams p;
        p.spike = ald_from_json(body.at("spike"), "effect.spike_slab.spike");
        p.slab_weight = number(body, "slab_weight", "effect.spike_slab");
        if (!body.contains("slab_intervals") || !body.at("slab_intervals").is_array()) {
            throw std::invalid_argument("effect.spike_slab: 'slab_intervals' must be a list of [lo, hi] pairs");
        }
        for (const auto& pair : body.at("slab_intervals")) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
                throw std::invalid_argument("effect.spike_slab: 'slab_intervals' entries must be [lo, hi]");
            }
            p.slab_intervals.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
        return std::make_shared<SpikeSlab>(std::move(p));
    }
    if (tag == "shifted_chisq") {
        const double df = number(body, "df", "effect.shifted_chisq");
        if (df != std::floor(df)) {
            throw std::invalid_argument("effect.shifted_chisq: 'df' must be an integer");
        }
        return std::make_shared<ShiftedChiSquare>(
            ShiftedChiSqParams{static_cast<int>(df), number(body, "shift", "effect.shifted_chisq")});
    }
    if (tag == "normal") {
        return std::make_shared<Normal>(
            NormalParams{number(body, "mean", "effect.normal"), number(body, "sd", "effect.normal")});
    }
    throw std::invalid_argument("effect: unknown distribution '" + tag + "'");
}

} // namespace signgate
