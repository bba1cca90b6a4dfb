#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace progsyn {

// Deterministic random source. std::mt19937_64 output is specified by the
// standard, but the standard distributions are not, so sampling is done by
// hand to keep streams identical across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1) with 53 bits of entropy
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // uniform integer in [lo, hi], inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        auto wide = static_cast<unsigned __int128>(next_u64()) * span;
        return lo + static_cast<std::int64_t>(wide >> 64);
    }

    // standard normal via Box-Muller; one fresh pair of draws per call
    double gaussian();

    template <typename T>
    const T& pick(const std::vector<T>& choices) {
        return choices[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(choices.size()) - 1))];
    }

private:
    std::mt19937_64 engine_;
};

// 64-bit FNV-1a; used for transcript digests and noise derivation
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);

// splitmix64 finalizer, for turning hashes into well-mixed seeds
std::uint64_t mix64(std::uint64_t x);

} // namespace progsyn
