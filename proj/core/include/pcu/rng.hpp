#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace pcu::rng {

// splitmix64 finalizer; the basis of all randomness in the project.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Order-sensitive key combination. key(seed, patch_id, run_id) gives each
// logical random stream its own independent key, so streams can be drawn from
// in any order (or in parallel) without affecting each other.
constexpr std::uint64_t key(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t k = 0x706375ull;  // "pcu"
    for (auto p : parts) k = mix64(k ^ mix64(p));
    return k;
}

template <class... Parts>
constexpr std::uint64_t key(Parts... parts) {
    return key({static_cast<std::uint64_t>(parts)...});
}

// Stream tags: keep unrelated consumers of the same seed decorrelated.
enum Tag : std::uint64_t {
    kTagInit = 1,      // parameter initialization
    kTagGrid = 2,      // learnable folding codes
    kTagCoarse = 3,    // coarse-patch FPS starts
    kTagUniform = 4,   // uniform-term seed draws
    kTagShuffle = 5,   // epoch shuffling
    kTagMerge = 6,     // inference merge FPS start
    kTagSample = 7,    // mesh sampling
    kTagEval = 8,      // metric evaluation seeds
};

// Counter-based stream: cheap to construct from a key, never shares state.
class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

    // uniform in [0, 1)
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]; safe as a log() argument
    double next_uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // standard normal via Box-Muller
    double next_normal() {
        double u1 = next_uniform_pos();
        double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // uniform in [0, n); n > 0
    int next_index(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace pcu::rng
