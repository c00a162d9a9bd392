#pragma once

#include <optional>
#include <vector>

#include "gasp/pointcloud.hpp"
#include "gasp/rff.hpp"
#include "gasp/tensor.hpp"

namespace gasp {

enum class Activation { None, LeakyRelu, Tanh, Sigmoid };

constexpr double kLeakySlope = 0.2;

struct MlpArchitecture {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{128, 128, 128};
    std::size_t output_dim = 0;

    bool operator==(const MlpArchitecture&) const = default;
};

// Flattened weight length with layer order (W1, b1, W2, b2, ...);
// W_l is stored row-major as [in x out].
std::size_t param_count(const MlpArchitecture& arch);

// (fan_in, fan_out) per layer, in theta order.
std::vector<std::pair<std::size_t, std::size_t>> mlp_layer_dims(const MlpArchitecture& arch);

// x is [n x input_dim]; applies the affine stack held in theta with the given
// hidden/final activations.
Tensor affine_stack(const MlpArchitecture& arch, const Tensor& theta, const Tensor& x,
                    Activation hidden, Activation final_act);

// Per-layer uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] init. final_w_scale
// multiplies the last layer's weights; final_bias_zero zeroes its bias.
Tensor init_mlp_params(const MlpArchitecture& arch, Rng& rng, double final_w_scale = 1.0,
                       bool final_bias_zero = false);

// One sampled/fitted function: implicit MLP plus optional Fourier encoding.
struct FunctionRep {
    MlpArchitecture arch;
    Tensor theta;
    std::optional<FourierEncoding> encoding;

    // coords [n x d] -> features [n x k]; rows are independent, so evaluating
    // the same coordinate at any resolution gives the same feature.
    Tensor evaluate(const Tensor& coords) const;
};

// Applies the optional encoding, then the leaky-relu/tanh stack.
Tensor function_forward(const MlpArchitecture& arch, const Tensor& theta,
                        const std::optional<FourierEncoding>& encoding, const Tensor& coords);

struct FitResult {
    FunctionRep rep;
    double final_loss = 0.0;
    std::vector<double> loss_history;
};

// Adam on the mean squared objective over the cloud's points; deterministic
// given the seed. steps = 0 returns the initialization untouched.
FitResult fit_single(const PointCloud& data, const MlpArchitecture& arch,
                     std::optional<FourierEncoding> encoding, std::size_t steps, double lr,
                     std::uint64_t seed);

} // namespace gasp
