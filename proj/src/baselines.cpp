#include "gasp/baselines.hpp"

#include <cmath>

#include "gasp/optim.hpp"
#include "gasp/pointconv.hpp"

namespace gasp {

SetDiscriminator SetDiscriminator::make(std::size_t d, std::size_t k, std::size_t m_x,
                                        std::size_t m_y, std::vector<std::size_t> phi_hidden,
                                        std::size_t p, std::vector<std::size_t> rho_hidden,
                                        double sigma_x, double sigma_y, std::uint64_t seed) {
    SetDiscriminator sd;
    Rng rng(seed);
    sd.enc_x = sample_encoding(m_x, d, sigma_x, rng.next_u64());
    sd.enc_y = sample_encoding(m_y, k, sigma_y, rng.next_u64());
    sd.phi_arch = MlpArchitecture{2 * (m_x + m_y), std::move(phi_hidden), p};
    sd.rho_arch = MlpArchitecture{p, std::move(rho_hidden), 1};
    sd.phi_theta = init_mlp_params(sd.phi_arch, rng);
    sd.phi_theta.set_requires_grad(true);
    sd.rho_theta = init_mlp_params(sd.rho_arch, rng);
    sd.rho_theta.set_requires_grad(true);
    return sd;
}

std::vector<Tensor> SetDiscriminator::parameters() { return {phi_theta, rho_theta}; }

Tensor set_discriminate_logit(const SetDiscriminator& sd, const Tensor& coords,
                              const Tensor& feats) {
    if (coords.ndim() != 2 || coords.shape()[1] != sd.enc_x.d) {
        throw DimensionError("set_discriminate: coordinate dimension mismatch");
    }
    if (feats.ndim() != 2 || feats.shape()[0] != coords.shape()[0] ||
        feats.shape()[1] != sd.enc_y.d) {
        throw DimensionError("set_discriminate: feature shape mismatch");
    }
    const std::size_t n = coords.shape()[0];
    const auto order = canonical_order(coords.data(), feats.data(), n, sd.enc_x.d, sd.enc_y.d);
    Tensor cs = gather_rows(coords, order);
    Tensor fs = gather_rows(feats, order);

    Tensor per_elem = concat(encode(sd.enc_x, cs), encode(sd.enc_y, fs), 1);
    Tensor h = affine_stack(sd.phi_arch, sd.phi_theta, per_elem, Activation::LeakyRelu,
                            Activation::None);
    Tensor agg = mul(sum(h, {0}, /*keepdims=*/true), // 1 x p
                     Tensor::scalar(1.0 / std::sqrt(static_cast<double>(n))));
    Tensor logit = affine_stack(sd.rho_arch, sd.rho_theta, agg, Activation::LeakyRelu,
                                Activation::None);
    return reshape(logit, {1});
}

Tensor set_discriminate(const SetDiscriminator& sd, const Tensor& coords, const Tensor& feats) {
    return sigmoid(set_discriminate_logit(sd, coords, feats));
}

Tensor set_discriminate(const SetDiscriminator& sd, const PointCloud& pc) {
    return set_discriminate(sd, pc.coords_tensor(), pc.feats_tensor());
}

namespace {

// Plain-double affine stack used by the verification sweeps.
std::vector<double> affine_stack_raw(const MlpArchitecture& arch, const std::vector<double>& theta,
                                     std::vector<double> x, bool final_linear) {
    const auto dims = mlp_layer_dims(arch);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < dims.size(); ++l) {
        const auto [in, out] = dims[l];
        std::vector<double> next(out);
        for (std::size_t o = 0; o < out; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += x[i] * theta[offset + i * out + o];
            next[o] = acc + theta[offset + in * out + o];
        }
        offset += in * out + out;
        if (l + 1 < dims.size()) {
            for (auto& v : next) v = v > 0.0 ? v : kLeakySlope * v;
        } else if (!final_linear) {
            for (auto& v : next) v = 1.0 / (1.0 + std::exp(-v));
        }
        x = std::move(next);
    }
    return x;
}

} // namespace

double set_discriminate_value(const SetDiscriminator& sd, const std::vector<double>& coords,
                              const std::vector<double>& feats, std::size_t n) {
    std::vector<double> agg(sd.phi_arch.output_dim, 0.0);
    std::vector<double> x(sd.enc_x.d), y(sd.enc_y.d);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(coords.begin() + i * sd.enc_x.d, sd.enc_x.d, x.begin());
        std::copy_n(feats.begin() + i * sd.enc_y.d, sd.enc_y.d, y.begin());
        std::vector<double> enc = encode_point(sd.enc_x, x);
        const std::vector<double> ey = encode_point(sd.enc_y, y);
        enc.insert(enc.end(), ey.begin(), ey.end());
        const std::vector<double> h =
            affine_stack_raw(sd.phi_arch, sd.phi_theta.data(), std::move(enc), true);
        for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += h[j];
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : agg) v *= scale;
    return affine_stack_raw(sd.rho_arch, sd.rho_theta.data(), std::move(agg), false)[0];
}

Tensor autodecoder_decode(const AutoDecoder& ad, const Tensor& z, const Tensor& coords) {
    Tensor input = ad.encoding ? encode(*ad.encoding, coords) : coords;
    Tensor zrow = z.ndim() == 1 ? reshape(z, {1, z.size()}) : z;
    if (zrow.shape()[1] != ad.latent_dim) throw DimensionError("latent dimension mismatch");
    // Tile the latent across rows through a differentiable gather.
    std::vector<std::size_t> rep(input.shape()[0], 0);
    Tensor tiled = gather_rows(zrow, rep);
    return affine_stack(ad.decoder_arch, ad.decoder_theta, concat(input, tiled, 1),
                        Activation::LeakyRelu, Activation::Tanh);
}

Tensor autodecoder_reconstruct(const AutoDecoder& ad, std::size_t i, const Tensor& coords) {
    if (i >= ad.latents.shape()[0]) throw ValueError("auto-decoder example index out of range");
    return autodecoder_decode(ad, gather_rows(ad.latents, {i}), coords);
}

AutoDecoder autodecoder_train(const std::vector<PointCloud>& dataset,
                              const AutoDecoderConfig& config) {
    if (dataset.empty()) throw ValueError("autodecoder_train: empty dataset");
    const std::size_t d = dataset.front().d;
    const std::size_t k = dataset.front().k;
    for (const auto& pc : dataset) {
        if (pc.d != d || pc.k != k || pc.n == 0) {
            throw DimensionError("autodecoder_train: inconsistent dataset dims");
        }
    }

    AutoDecoder ad;
    ad.latent_dim = config.latent_dim;
    ad.encoding = config.encoding;
    ad.prior_weight = config.prior_weight;
    const std::size_t enc_dim = ad.encoding ? ad.encoding->output_dim() : d;
    ad.decoder_arch = MlpArchitecture{enc_dim + config.latent_dim, config.hidden_dims, k};

    Rng rng(config.seed);
    ad.decoder_theta = init_mlp_params(ad.decoder_arch, rng);
    ad.decoder_theta.set_requires_grad(true);
    // Latents start small so the prior term does not dominate early steps.
    ad.latents = Tensor::randn({dataset.size(), config.latent_dim}, rng);
    {
        auto& z = ad.latents.data_mut();
        for (auto& v : z) v *= 0.01;
    }
    ad.latents.set_requires_grad(true);

    std::vector<Tensor> coord_t, feat_t;
    coord_t.reserve(dataset.size());
    feat_t.reserve(dataset.size());
    for (const auto& pc : dataset) {
        coord_t.push_back(pc.coords_tensor());
        feat_t.push_back(pc.feats_tensor());
    }

    Adam opt({ad.decoder_theta, ad.latents}, config.lr, 0.9, 0.999);
    for (std::size_t s = 0; s < config.steps; ++s) {
        Tensor loss = Tensor::scalar(0.0);
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            Tensor zi = gather_rows(ad.latents, {i});
            Tensor pred = autodecoder_decode(ad, zi, coord_t[i]);
            Tensor mse = mean(sum(square(sub(pred, feat_t[i])), {1}), {0});
            Tensor prior = mul(sum(square(zi)), Tensor::scalar(ad.prior_weight));
            loss = add(loss, add(mse, prior));
        }
        loss = mul(loss, Tensor::scalar(1.0 / static_cast<double>(dataset.size())));
        if (!std::isfinite(loss.item())) throw NumericError("autodecoder_train: loss diverged");
        auto grads = backward(loss, {ad.decoder_theta, ad.latents});
        opt.step(grads);
    }
    return ad;
}

} // namespace gasp
