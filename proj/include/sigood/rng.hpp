#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sigood {

// Deterministic RNG. mt19937_64 has a standard-specified output sequence;
// the transforms below are our own so draws are identical on every platform
// (std::uniform_real_distribution et al. are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via the polar method; caches the spare deviate.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, bound) without modulo bias.
    std::uint64_t bounded(std::uint64_t bound);

    // Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i + 1));
            std::swap(items[i], items[j]);
        }
    }

    std::vector<double> uniform_vector(std::size_t n, double lo, double hi);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stable sub-stream seed: mixes `seed` with `tag` so independent consumers
// (per-graph generators, per-epoch noise) never share a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

}  // namespace sigood
