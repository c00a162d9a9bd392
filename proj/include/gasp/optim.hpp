#pragma once

#include <vector>

#include "gasp/tensor.hpp"

namespace gasp {

struct AdamState {
    Tensor m; // first-moment accumulator
    Tensor v; // second-moment accumulator
    std::size_t step = 0;

    static AdamState make(const Shape& shape);
};

// Bias-corrected Adam update, in place on `param`. Pure data math; never call
// while a graph referencing `param` is alive.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

class Adam {
public:
    Adam(std::vector<Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    // grads aligned with the registered params
    void step(const std::vector<Tensor>& grads);

    const std::vector<Tensor>& params() const { return params_; }
    std::vector<AdamState>& states() { return states_; }
    double lr() const { return lr_; }

private:
    std::vector<Tensor> params_;
    std::vector<AdamState> states_;
    double lr_, beta1_, beta2_, eps_;
};

} // namespace gasp
