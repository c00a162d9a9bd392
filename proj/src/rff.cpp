#include "gasp/rff.hpp"

#include <cmath>

namespace gasp {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

FourierEncoding sample_encoding(std::size_t m, std::size_t d, double sigma, std::uint64_t seed) {
    if (m < 1 || d < 1) throw ValueError("sample_encoding requires m >= 1 and d >= 1");
    if (!(sigma > 0.0)) throw ValueError("sample_encoding requires sigma > 0");
    Rng rng(seed);
    std::vector<double> b(m * d);
    for (auto& v : b) v = sigma * rng.normal();
    FourierEncoding enc;
    enc.B = Tensor::from_data({m, d}, std::move(b));
    enc.m = m;
    enc.d = d;
    enc.sigma = sigma;
    enc.seed = seed;
    return enc;
}

Tensor encode(const FourierEncoding& enc, const Tensor& coords) {
    if (coords.ndim() != 2 || coords.shape()[1] != enc.d) {
        throw DimensionError("encode: coordinate dimension does not match encoding");
    }
    Tensor proj = mul(matmul(coords, transpose(enc.B)), Tensor::scalar(kTwoPi)); // n x m
    return concat(cos(proj), sin(proj), 1);
}

std::vector<double> encode_point(const FourierEncoding& enc, const std::vector<double>& x) {
    if (x.size() != enc.d) throw DimensionError("encode_point: coordinate dimension mismatch");
    const auto& b = enc.B.data();
    std::vector<double> out(2 * enc.m);
    for (std::size_t i = 0; i < enc.m; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < enc.d; ++j) dot += b[i * enc.d + j] * x[j];
        out[i] = std::cos(kTwoPi * dot);
        out[enc.m + i] = std::sin(kTwoPi * dot);
    }
    return out;
}

} // namespace gasp
