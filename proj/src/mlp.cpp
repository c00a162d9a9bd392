#include "gasp/mlp.hpp"

#include <cmath>

#include "gasp/optim.hpp"

namespace gasp {

std::vector<std::pair<std::size_t, std::size_t>> mlp_layer_dims(const MlpArchitecture& arch) {
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    std::size_t in = arch.input_dim;
    for (auto h : arch.hidden_dims) {
        dims.emplace_back(in, h);
        in = h;
    }
    dims.emplace_back(in, arch.output_dim);
    return dims;
}

namespace {

Tensor apply_activation(const Tensor& x, Activation act) {
    switch (act) {
        case Activation::None: return x;
        case Activation::LeakyRelu: return leaky_relu(x, kLeakySlope);
        case Activation::Tanh: return tanh(x);
        case Activation::Sigmoid: return sigmoid(x);
    }
    throw ValueError("unknown activation");
}

} // namespace

std::size_t param_count(const MlpArchitecture& arch) {
    if (arch.input_dim == 0 || arch.output_dim == 0) {
        throw DimensionError("architecture dims must be positive");
    }
    std::size_t total = 0;
    for (auto [in, out] : mlp_layer_dims(arch)) total += in * out + out;
    return total;
}

Tensor affine_stack(const MlpArchitecture& arch, const Tensor& theta, const Tensor& x,
                    Activation hidden, Activation final_act) {
    if (theta.size() != param_count(arch)) {
        throw DimensionError("theta length does not match architecture");
    }
    if (x.ndim() != 2 || x.shape()[1] != arch.input_dim) {
        throw DimensionError("input width does not match architecture");
    }
    const auto dims = mlp_layer_dims(arch);
    Tensor h = x;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < dims.size(); ++l) {
        const auto [in, out] = dims[l];
        Tensor w = reshape(slice(theta, 0, offset, in * out), {in, out});
        offset += in * out;
        Tensor b = slice(theta, 0, offset, out);
        offset += out;
        h = add(matmul(h, w), b);
        h = apply_activation(h, l + 1 == dims.size() ? final_act : hidden);
    }
    return h;
}

Tensor init_mlp_params(const MlpArchitecture& arch, Rng& rng, double final_w_scale,
                       bool final_bias_zero) {
    const auto dims = mlp_layer_dims(arch);
    std::vector<double> theta;
    theta.reserve(param_count(arch));
    for (std::size_t l = 0; l < dims.size(); ++l) {
        const auto [in, out] = dims[l];
        const bool last = l + 1 == dims.size();
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        const double wscale = last ? final_w_scale : 1.0;
        for (std::size_t i = 0; i < in * out; ++i) theta.push_back(wscale * rng.uniform(-bound, bound));
        for (std::size_t i = 0; i < out; ++i) {
            theta.push_back(last && final_bias_zero ? 0.0 : rng.uniform(-bound, bound));
        }
    }
    return Tensor::from_data({theta.size()}, std::move(theta));
}

Tensor function_forward(const MlpArchitecture& arch, const Tensor& theta,
                        const std::optional<FourierEncoding>& encoding, const Tensor& coords) {
    Tensor input = encoding ? encode(*encoding, coords) : coords;
    return affine_stack(arch, theta, input, Activation::LeakyRelu, Activation::Tanh);
}

Tensor FunctionRep::evaluate(const Tensor& coords) const {
    return function_forward(arch, theta, encoding, coords);
}

FitResult fit_single(const PointCloud& data, const MlpArchitecture& arch,
                     std::optional<FourierEncoding> encoding, std::size_t steps, double lr,
                     std::uint64_t seed) {
    if (data.n == 0) throw ValueError("fit_single: empty point cloud");
    for (double f : data.feats) {
        if (f < -1.0 || f > 1.0) throw ValueError("fit_single: features must lie in [-1, 1]");
    }
    const std::size_t expect_in = encoding ? encoding->output_dim() : data.d;
    if (arch.input_dim != expect_in || arch.output_dim != data.k) {
        throw DimensionError("fit_single: architecture does not match data dims");
    }

    Rng rng(seed);
    Tensor theta = init_mlp_params(arch, rng);
    theta.set_requires_grad(true);

    FitResult result;
    result.rep = FunctionRep{arch, theta, std::move(encoding)};
    const Tensor coords = data.coords_tensor();
    const Tensor target = data.feats_tensor();

    auto objective = [&]() {
        const Tensor pred = result.rep.evaluate(coords);
        // mean over points of the per-point squared feature error
        return mean(sum(square(sub(pred, target)), {1}), {0});
    };

    Adam opt({theta}, lr, 0.9, 0.999);
    result.loss_history.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        const Tensor loss = objective();
        const double lv = loss.item();
        if (!std::isfinite(lv)) throw NumericError("fit_single: loss diverged");
        result.loss_history.push_back(lv);
        auto grads = backward(loss, {theta});
        opt.step(grads);
    }
    {
        NoGradGuard ng(false);
        result.final_loss = objective().item();
    }
    return result;
}

} // namespace gasp
