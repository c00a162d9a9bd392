#pragma once

#include <cstdint>
#include <vector>

#include "gasp/tensor.hpp"

namespace gasp {

// Random Fourier feature encoding x -> (cos(2 pi B x), sin(2 pi B x)).
// B is sampled once and stays fixed; learning it buys little and costs
// training speed, so it is treated as data, not a parameter.
struct FourierEncoding {
    Tensor B;            // m x d
    std::size_t m = 0;
    std::size_t d = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    std::size_t output_dim() const { return 2 * m; }
};

// Entries of B drawn i.i.d. from N(0, sigma^2) with a counter-based generator,
// so the same seed reproduces B exactly on any platform.
FourierEncoding sample_encoding(std::size_t m, std::size_t d, double sigma, std::uint64_t seed);

// coords is [n x d]; result is [n x 2m], differentiable w.r.t. coords.
Tensor encode(const FourierEncoding& enc, const Tensor& coords);

// Data-only single-point path used by the numerical verification sweeps.
std::vector<double> encode_point(const FourierEncoding& enc, const std::vector<double>& x);

} // namespace gasp
