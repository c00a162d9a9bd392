#include "gasp/random.hpp"

#include <cmath>

namespace gasp {

std::uint64_t mix_u64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix_u64(seed_ + 0x9E3779B97F4A7C15ULL * counter_);
}

double Rng::uniform() {
    // 53 random bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    // 1 - u1 lies in (0, 1], keeping the log finite.
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    return next_u64() % n;
}

Rng Rng::fork(std::uint64_t stream) const {
    return Rng(mix_u64(seed_ ^ mix_u64(stream + 0x632BE59BD9B4E019ULL)));
}

} // namespace gasp
