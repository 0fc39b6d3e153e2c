#include "signgate/rng.hpp"

#include "signgate/numerics.hpp"

namespace signgate {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + index * 0xd1b54a32d192ed03ULL);
}

double Rng::normal() {
    return std_normal_quantile(uniform());
}

void Rng::fill_normal(std::span<double> out) {
    for (double& v : out) {
        v = normal();
    }
}

} // namespace signgate
