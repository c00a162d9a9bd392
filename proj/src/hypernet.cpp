#include "gasp/hypernet.hpp"

namespace gasp {

LatentCode sample_latent(std::size_t latent_dim, std::uint64_t seed) {
    Rng rng(seed);
    return sample_latent(latent_dim, rng);
}

LatentCode sample_latent(std::size_t latent_dim, Rng& rng) {
    if (latent_dim == 0) throw ValueError("latent_dim must be positive");
    return LatentCode{Tensor::randn({1, latent_dim}, rng)};
}

Hypernetwork Hypernetwork::make(std::size_t latent_dim, std::vector<std::size_t> hidden_dims,
                                MlpArchitecture target_arch,
                                std::optional<FourierEncoding> encoding, std::uint64_t seed) {
    Hypernetwork h;
    h.latent_dim = latent_dim;
    h.hidden_dims = std::move(hidden_dims);
    h.target_arch = std::move(target_arch);
    h.encoding = std::move(encoding);
    Rng rng(seed);
    h.phi = init_mlp_params(h.hyper_arch(), rng, /*final_w_scale=*/0.1, /*final_bias_zero=*/true);
    h.phi.set_requires_grad(true);
    return h;
}

Tensor Hypernetwork::generate_weights(const LatentCode& z) const {
    if (z.z.ndim() != 2 || z.z.shape()[0] != 1 || z.z.shape()[1] != latent_dim) {
        throw DimensionError("latent code dimension mismatch");
    }
    Tensor out = affine_stack(hyper_arch(), phi, z.z, Activation::LeakyRelu, Activation::None);
    return reshape(out, {param_count(target_arch)});
}

Tensor Hypernetwork::generate_features(const LatentCode& z, const Tensor& coords) const {
    return function_forward(target_arch, generate_weights(z), encoding, coords);
}

FunctionRep Hypernetwork::emit(const LatentCode& z) const {
    NoGradGuard ng(false);
    return FunctionRep{target_arch, generate_weights(z).detach(), encoding};
}

} // namespace gasp
