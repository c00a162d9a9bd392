#pragma once

#include <optional>

#include "gasp/mlp.hpp"

namespace gasp {

struct LatentCode {
    Tensor z; // [1 x latent_dim]
};

// Standard-normal latent draw, deterministic given the seed.
LatentCode sample_latent(std::size_t latent_dim, std::uint64_t seed);
LatentCode sample_latent(std::size_t latent_dim, Rng& rng);

// Generator: maps latents through an MLP whose output is the flattened weight
// vector of the target function representation. The Fourier encoding is part
// of the generator and shared by every emitted function.
struct Hypernetwork {
    std::size_t latent_dim = 64;
    std::vector<std::size_t> hidden_dims{256, 512};
    MlpArchitecture target_arch;
    std::optional<FourierEncoding> encoding;
    Tensor phi; // flattened hypernetwork weights, learnable

    MlpArchitecture hyper_arch() const {
        return MlpArchitecture{latent_dim, hidden_dims, param_count(target_arch)};
    }

    // The final layer starts at 1/10 of fan-in scale with zero bias so the
    // emitted tanh networks begin near-constant instead of saturated.
    static Hypernetwork make(std::size_t latent_dim, std::vector<std::size_t> hidden_dims,
                             MlpArchitecture target_arch, std::optional<FourierEncoding> encoding,
                             std::uint64_t seed);

    // theta = g_phi(z), differentiable w.r.t. phi and z.
    Tensor generate_weights(const LatentCode& z) const;

    // coords [n x d] -> features [n x k] of the emitted function.
    Tensor generate_features(const LatentCode& z, const Tensor& coords) const;

    FunctionRep emit(const LatentCode& z) const; // detached snapshot
};

} // namespace gasp
