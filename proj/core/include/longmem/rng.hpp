#pragma once

#include <cstdint>
#include <random>

namespace longmem {

namespace detail {

// splitmix64 finalizer; good enough to decorrelate structured (seed, stream) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}

// Mixes (seed, stream) into a single 64-bit state so that distinct stream ids
// give effectively independent generators for the same base seed.  Streams are
// cheap to construct; batch code makes one per path so results do not depend
// on how work is split across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : origin_(detail::mix64(detail::mix64(seed) ^ detail::mix64(stream + 0x51c64d5e2b1a3f65ull))),
          gen_(origin_) {}

    double normal() { return normal_(gen_); }

    // [0, 1)
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }

    // [a, b)
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }

    double exponential(double mean) {
        return std::exponential_distribution<double>(1.0 / mean)(gen_);
    }

    std::uint64_t bits() { return gen_(); }

    // Derive a child stream deterministically from the parent's identity (not
    // its current position), so forks are stable no matter how much the
    // parent has already been consumed.
    RngStream fork(std::uint64_t stream) const { return RngStream(origin_, stream); }

private:
    std::uint64_t origin_;
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}
