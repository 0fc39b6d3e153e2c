#pragma once

#include "signgate/numerics.hpp"
#include "signgate/rng.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace signgate {

/// Observed unit-variance statistics Y_1..Y_m.
class Dataset {
public:
    explicit Dataset(std::vector<double> y);

    std::span<const double> values() const { return y_; }
    std::size_t size() const { return y_.size(); }
    double operator[](std::size_t i) const { return y_[i]; }

    double mean() const;
    /// Sample variance with the 1/(m-1) normalization. Requires m >= 2.
    double sample_variance() const;

private:
    std::vector<double> y_;
};

/// Effect-size law G. Implementations are immutable and shareable across
/// threads; sampling draws from a caller-owned Rng.
class EffectDistribution {
public:
    virtual ~EffectDistribution() = default;

    virtual double density(double theta) const = 0;
    /// pi0 = Pr(theta > 0).
    virtual double prob_positive() const = 0;
    virtual double sample(Rng& rng) const = 0;
    /// Points where the density is not smooth. Quadrature never straddles them.
    virtual std::vector<double> kink_points() const = 0;
    /// Finite interval holding at least 1 - 1e-12 of the mass.
    virtual Interval mass_interval() const = 0;
    virtual std::string describe() const = 0;

    void sample(Rng& rng, std::span<double> out) const;
    std::vector<double> sample(Rng& rng, std::size_t n) const;
};

using EffectPtr = std::shared_ptr<const EffectDistribution>;

struct ALDParams {
    double mu = 0.0;
    double tau = 1.0;
    double q = 0.5;

    void validate() const;
};

struct SpikeSlabParams {
    ALDParams spike;
    std::vector<Interval> slab_intervals;
    double slab_weight = 0.01;

    void validate() const;
};

struct ShiftedChiSqParams {
    int df = 3;
    double shift = 3.0;

    void validate() const;
};

struct NormalParams {
    double mean = 0.0;
    double sd = 1.0;

    void validate() const;
};

double ald_density(double theta, const ALDParams& p);

struct Moments {
    double mean;
    double variance;
};

/// Moments of theta (no measurement-error term); the mean is shifted by mu.
Moments ald_moments(const ALDParams& p);

/// Thrown by fit_ald_moments when the sample shows no excess variance over
/// the unit noise. Carries the clamped fallback parameters.
class DegenerateFitError : public std::runtime_error {
public:
    DegenerateFitError(const std::string& what, ALDParams fallback)
        : std::runtime_error(what), fallback_(fallback) {}
    const ALDParams& fallback() const { return fallback_; }

private:
    ALDParams fallback_;
};

inline constexpr double kExcessVarianceFloor = 1e-6;
inline constexpr double kTauFloor = 1e-4;
inline constexpr double kSkewClamp = 1e-6;

/// Method-of-moments fit of a mu = 0 asymmetric Laplace model for theta
/// from Y = theta + N(0, 1):
///   mean(Y)     = tau (1 - 2q) / (q (1 - q))
///   var(Y) - 1  = tau^2 (1 - 2q + 2q^2) / ((1 - q)^2 q^2)
/// Eliminating tau leaves a one-dimensional equation in q.
ALDParams fit_ald_moments(const Dataset& y);

class AsymmetricLaplace final : public EffectDistribution {
public:
    using EffectDistribution::sample;
    explicit AsymmetricLaplace(ALDParams p);

    double density(double theta) const override { return ald_density(theta, p_); }
    double prob_positive() const override;
    double sample(Rng& rng) const override;
    std::vector<double> kink_points() const override { return {p_.mu}; }
    Interval mass_interval() const override;
    std::string describe() const override;

    const ALDParams& params() const { return p_; }

private:
    ALDParams p_;
};

class SpikeSlab final : public EffectDistribution {
public:
    using EffectDistribution::sample;
    explicit SpikeSlab(SpikeSlabParams p);

    double density(double theta) const override;
    double prob_positive() const override;
    double sample(Rng& rng) const override;
    std::vector<double> kink_points() const override;
    Interval mass_interval() const override;
    std::string describe() const override;

    const SpikeSlabParams& params() const { return p_; }

private:
    SpikeSlabParams p_;
    AsymmetricLaplace spike_;
    double slab_length_;
};

/// theta = X - shift with X ~ chi-square(df).
class ShiftedChiSquare final : public EffectDistribution {
public:
    using EffectDistribution::sample;
    explicit ShiftedChiSquare(ShiftedChiSqParams p);

    double density(double theta) const override;
    double prob_positive() const override { return prob_positive_; }
    double sample(Rng& rng) const override;
    std::vector<double> kink_points() const override { return {-p_.shift}; }
    Interval mass_interval() const override;
    std::string describe() const override;

private:
    ShiftedChiSqParams p_;
    double log_norm_;
    double prob_positive_;
};

class Normal final : public EffectDistribution {
public:
    using EffectDistribution::sample;
    explicit Normal(NormalParams p);

    double density(double theta) const override;
    double prob_positive() const override;
    double sample(Rng& rng) const override { return p_.mean + p_.sd * rng.normal(); }
    std::vector<double> kink_points() const override { return {}; }
    Interval mass_interval() const override;
    std::string describe() const override;

private:
    NormalParams p_;
};

/// Builds a distribution from its tagged-union config form, e.g.
/// {"ald": {"mu": 0, "tau": 0.2, "q": 0.5}}. Throws std::invalid_argument
/// naming the offending key.
EffectPtr distribution_from_json(const nlohmann::json& spec);

} // namespace signgate
