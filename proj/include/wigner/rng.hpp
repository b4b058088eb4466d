// Counter-based splittable PRNG for reproducible Monte Carlo runs.
//
// A stream is identified by (seed, worker, round). Draws are produced by
// applying the splitmix64 finalizer to key + counter, so a stream's output
// depends only on its identity and draw index, never on how many other
// streams exist or which thread owns it.

#ifndef WIGNER_RNG_HPP
#define WIGNER_RNG_HPP

#include <cstdint>

namespace wigner {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t worker = 0,
                       std::uint64_t round = 0)
        : seed_(seed), worker_(worker), round_(round) {
        key_ = mix(seed + kGamma);
        key_ = mix(key_ ^ (worker + kGamma));
        key_ = mix(key_ ^ (round + kGamma));
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    /// Uniform double in [0, 1), 53 bits of entropy.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t worker() const { return worker_; }
    std::uint64_t round() const { return round_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    std::uint64_t seed_, worker_, round_;
};

} // namespace wigner

#endif // WIGNER_RNG_HPP
