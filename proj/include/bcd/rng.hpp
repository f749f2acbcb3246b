#pragma once

#include <cmath>
#include <cstdint>

namespace bcd {

// Counter-based PRNG built on the splitmix64 finalizer. Every draw is a pure
// function of (seed, stream, counter), so runs are reproducible regardless of
// call order elsewhere in the program.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_u64(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t counter) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

// Stream ids keep independent random sequences from colliding.
namespace rng_stream {
inline constexpr std::uint64_t init = 1;       // parameter initialization
inline constexpr std::uint64_t data_x = 2;     // synthetic features
inline constexpr std::uint64_t data_y = 3;     // label noise
inline constexpr std::uint64_t teacher = 4;    // ground-truth model
inline constexpr std::uint64_t order = 5;      // block reshuffling
inline constexpr std::uint64_t batch = 6;      // mini-batch shuffling
inline constexpr std::uint64_t probe = 7;      // smoothness sampling
}  // namespace rng_stream

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() { return hash_u64(seed_, stream_, counter_++); }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]
    double next_unit_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; consumes two counters per draw
    double next_normal() {
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // uniform integer in [0, n); n >= 1
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    void set_counter(std::uint64_t c) { counter_ = c; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace bcd
