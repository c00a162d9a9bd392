#include "gasp/optim.hpp"

#include <cmath>

namespace gasp {

AdamState AdamState::make(const Shape& shape) {
    AdamState st;
    st.m = Tensor::zeros(shape);
    st.v = Tensor::zeros(shape);
    return st;
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    if (param.shape() != grad.shape() || param.shape() != state.m.shape()) {
        throw DimensionError("adam_step shape mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    auto& p = param.data_mut();
    auto& m = state.m.data_mut();
    auto& v = state.v.data_mut();
    const auto& g = grad.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    states_.reserve(params_.size());
    for (const auto& p : params_) states_.push_back(AdamState::make(p.shape()));
}

void Adam::step(const std::vector<Tensor>& grads) {
    if (grads.size() != params_.size()) throw DimensionError("Adam: gradient count mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) {
        adam_step(params_[i], grads[i], states_[i], lr_, beta1_, beta2_, eps_);
    }
}

} // namespace gasp
