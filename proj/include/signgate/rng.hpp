#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace signgate {

/// SplitMix64 finalizer. A bijection on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `index` under `master`. Distinct indices give distinct
/// seeds for a fixed master because both the odd-multiplier offset and the
/// finalizer are bijective.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Reproducible random stream: mt19937_64 seeded with a single 64-bit word,
/// uniforms built from the top 53 bits, normals by inverse CDF. Every step
/// is fully specified so streams do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal();
    void fill_normal(std::span<double> out);

private:
    std::mt19937_64 engine_;
};

} // namespace signgate
