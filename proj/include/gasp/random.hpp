#pragma once

#include <cstdint>

namespace gasp {

// Counter-based generator: the state is (seed, counter) and every draw is a
// pure hash of the pair, so sequences are reproducible across platforms and
// the state serializes as two integers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();

    // [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; consumes two uniforms per draw.
    double normal();

    // [0, n), n >= 1
    std::uint64_t uniform_int(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }
    void set_counter(std::uint64_t c) { counter_ = c; }

    // Independent stream derived from this seed; does not advance the counter.
    Rng fork(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer; also used to derive stream seeds.
std::uint64_t mix_u64(std::uint64_t x);

} // namespace gasp
