#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mdgait {

// splitmix64 mixing step; used to derive well-separated seeds from a master
// seed + stream index without correlating the resulting generators.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// FNV-1a 64-bit hash; also usable incrementally via the seed parameter.
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t seed = 0xCBF29CE484222325ULL);
std::uint64_t fnv1a64(std::string_view s);

// Seed for a named substream, e.g. one dataset measurement.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

// Deterministic random source. Normal deviates use an explicit Box-Muller
// transform rather than std::normal_distribution, whose output is
// implementation-defined; this keeps generated datasets bit-identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal deviate (Box-Muller, cached spare).
    double normal();

    std::uint64_t seed() const { return seed_; }

    // Independent substream for parallel or per-item use.
    Rng fork(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mdgait
