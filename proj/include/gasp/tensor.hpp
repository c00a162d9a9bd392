#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gasp/random.hpp"

namespace gasp {

using Shape = std::vector<std::size_t>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct ValueError : Error {
    using Error::Error;
};

class Tensor;
struct Node;

// Leaving checked mode off skips the non-finite scan after each op. Tests run
// with it on; the training loop turns it off and validates losses per step.
void set_checked(bool on);
bool checked();

struct CheckedGuard {
    explicit CheckedGuard(bool on) : prev_(checked()) { set_checked(on); }
    ~CheckedGuard() { set_checked(prev_); }
private:
    bool prev_;
};

// Thread-local gradient-recording toggle. backward(create_graph=...) sets it
// for the duration of the pass, which is how second-order gradients appear.
bool grad_enabled();

struct GradGuard {
    explicit GradGuard(bool on);
    ~GradGuard();
private:
    bool prev_;
};
using NoGradGuard = GradGuard; // construct with false

struct Node {
    std::uint64_t seq = 0;
    const char* op = "";
    std::vector<Tensor> inputs;
    // grad wrt output -> grads wrt inputs (aligned with `inputs`); empty for leaves.
    std::function<std::vector<Tensor>(const Tensor&)> backward;
};

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor ones(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);
    static Tensor from_data(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor randn(Shape shape, Rng& rng, bool requires_grad = false);
    static Tensor rand_uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t ndim() const { return shape().size(); }
    std::size_t size() const;
    std::size_t dim(std::size_t axis) const { return shape().at(axis); }

    const std::vector<double>& data() const;
    // In-place mutation; never call while a graph referencing this tensor is alive.
    std::vector<double>& data_mut();

    double item() const;                    // requires size() == 1
    double at(std::size_t r, std::size_t c) const; // rank-2 convenience

    bool requires_grad() const;
    Tensor& set_requires_grad(bool on);     // creates the leaf node when turned on

    std::shared_ptr<Node> node() const;
    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

    Tensor detach() const;  // shares data, drops the graph link
    Tensor clone() const;   // deep data copy, leaf

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    friend Tensor make_op_result(Shape, std::vector<double>, const char*, std::vector<Tensor>,
                                 std::function<std::vector<Tensor>(const Tensor&)>);
};

// --- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor square(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = 0.2);
Tensor clamp(const Tensor& x, double lo, double hi);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator+(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
inline Tensor operator-(const Tensor& a, double b) { return sub(a, Tensor::scalar(b)); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }
inline Tensor operator/(const Tensor& a, double b) { return div(a, Tensor::scalar(b)); }
inline Tensor operator*(double a, const Tensor& b) { return mul(Tensor::scalar(a), b); }
inline Tensor operator-(double a, const Tensor& b) { return sub(Tensor::scalar(a), b); }

// Spec-facing dispatchers.
enum class EwOp { Add, Sub, Mul, Div, Square, Sin, Cos, Tanh, LeakyRelu, Exp, Log, Sigmoid };
Tensor elementwise(EwOp op, const Tensor& a, const Tensor* b = nullptr, double slope = 0.2);

// --- shape / indexing ------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x);  // rank 2
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len);
Tensor pad_axis(const Tensor& x, std::size_t axis, std::size_t before, std::size_t after);
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);
Tensor gather_rows(const Tensor& x, std::vector<std::size_t> idx);
Tensor scatter_rows(const Tensor& x, std::vector<std::size_t> idx, std::size_t n_rows);

// --- linear algebra / reductions -------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& x, std::vector<std::size_t> axes = {}, bool keepdims = false);
Tensor mean(const Tensor& x, std::vector<std::size_t> axes = {}, bool keepdims = false);

enum class ReduceOp { Sum, Mean };
Tensor reduce(ReduceOp op, const Tensor& x, std::vector<std::size_t> axes = {}, bool keepdims = false);

// Sum `g` down to `target` (adjoint of broadcasting).
Tensor reduce_to(const Tensor& g, const Shape& target);

// --- autodiff ---------------------------------------------------------------

// d(output)/d(each wrt tensor). `output` must hold one element. With
// create_graph the returned tensors are graph-connected, so they can be
// differentiated again. Tensors unreachable from `output` get zero gradients.
std::vector<Tensor> backward(const Tensor& output, const std::vector<Tensor>& wrt,
                             bool create_graph = false);

// --- batch norm --------------------------------------------------------------

struct BatchNormState {
    Tensor gamma;         // learnable scale
    Tensor beta;          // learnable shift
    Tensor running_mean;  // inference statistics, EMA-updated in training
    Tensor running_var;

    static BatchNormState make(std::size_t features);
    BatchNormState clone() const;
};

// x is [batch x features]. Training mode normalizes by batch statistics
// (biased variance) and EMA-updates the running stats; inference mode uses the
// running stats. Training requires batch >= 2.
Tensor batch_norm(const Tensor& x, BatchNormState& state, bool training,
                  double momentum = 0.9, double eps = 1e-5);

} // namespace gasp
