#pragma once

#include <optional>

#include "gasp/mlp.hpp"
#include "gasp/pointcloud.hpp"

namespace gasp {

// PointNet/DeepSets-style set discriminator:
// D(s) = sigmoid(rho((1/sqrt(n)) sum_i phi(gamma_x(x_i), gamma_y(y_i)))).
// The sqrt(n) normalization keeps its Lipschitz constant independent of n.
struct SetDiscriminator {
    FourierEncoding enc_x; // d -> 2 m_x
    FourierEncoding enc_y; // k -> 2 m_y
    MlpArchitecture phi_arch; // 2(m_x + m_y) -> ... -> p
    Tensor phi_theta;
    MlpArchitecture rho_arch; // p -> ... -> 1, sigmoid head
    Tensor rho_theta;

    static SetDiscriminator make(std::size_t d, std::size_t k, std::size_t m_x, std::size_t m_y,
                                 std::vector<std::size_t> phi_hidden, std::size_t p,
                                 std::vector<std::size_t> rho_hidden, double sigma_x,
                                 double sigma_y, std::uint64_t seed);
    std::vector<Tensor> parameters();
};

// Probability that the cloud is real; exactly permutation invariant (rows are
// reduced in content order).
Tensor set_discriminate(const SetDiscriminator& sd, const Tensor& coords, const Tensor& feats);
Tensor set_discriminate(const SetDiscriminator& sd, const PointCloud& pc);
Tensor set_discriminate_logit(const SetDiscriminator& sd, const Tensor& coords,
                              const Tensor& feats);

// Data-only path for the Lipschitz sweeps (no graph, summation in row order).
double set_discriminate_value(const SetDiscriminator& sd, const std::vector<double>& coords,
                              const std::vector<double>& feats, std::size_t n);

// Decoder-only baseline with one learnable latent per training example.
// Latents are concatenated to the (encoded) coordinates at the decoder input.
struct AutoDecoder {
    std::size_t latent_dim = 8;
    MlpArchitecture decoder_arch; // (enc_dim or d) + latent_dim -> ... -> k
    std::optional<FourierEncoding> encoding;
    Tensor decoder_theta;
    Tensor latents; // N x latent_dim
    double prior_weight = 1e-4;
};

struct AutoDecoderConfig {
    std::size_t latent_dim = 8;
    std::vector<std::size_t> hidden_dims{64, 64};
    std::optional<FourierEncoding> encoding; // coordinate encoding, optional
    double prior_weight = 1e-4;
    std::size_t steps = 500;
    double lr = 1e-3;
    std::uint64_t seed = 0;
};

// Jointly optimizes decoder weights and the latent table on
// MSE + prior_weight * ||z_i||^2 over the dataset.
AutoDecoder autodecoder_train(const std::vector<PointCloud>& dataset,
                              const AutoDecoderConfig& config);

// Decode an arbitrary latent at the given coordinates.
Tensor autodecoder_decode(const AutoDecoder& ad, const Tensor& z, const Tensor& coords);

// Decode the trained latent of example i; same code path as autodecoder_decode.
Tensor autodecoder_reconstruct(const AutoDecoder& ad, std::size_t i, const Tensor& coords);

} // namespace gasp
