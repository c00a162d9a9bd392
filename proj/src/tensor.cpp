#include "gasp/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "gasp/kernels.hpp"

namespace gasp {

namespace {

std::atomic<bool> g_checked{true};
thread_local bool g_grad_enabled = true;
thread_local std::uint64_t g_seq = 0;

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

void check_shape(const Shape& s) {
    if (s.empty()) throw DimensionError("tensor shape must have at least one dimension");
    for (auto d : s) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive");
    }
}

void check_finite(const char* op, const std::vector<double>& v) {
    if (!checked()) return;
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string("non-finite value produced by op '") + op + "'");
        }
    }
}

} // namespace

void set_checked(bool on) { g_checked.store(on, std::memory_order_relaxed); }
bool checked() { return g_checked.load(std::memory_order_relaxed); }

bool grad_enabled() { return g_grad_enabled; }

GradGuard::GradGuard(bool on) : prev_(g_grad_enabled) { g_grad_enabled = on; }
GradGuard::~GradGuard() { g_grad_enabled = prev_; }

struct Tensor::Impl {
    Shape shape;
    std::shared_ptr<std::vector<double>> data;
    bool requires_grad = false;
    std::shared_ptr<Node> node;
};

const Shape& Tensor::shape() const {
    if (!impl_) throw ValueError("use of undefined tensor");
    return impl_->shape;
}

std::size_t Tensor::size() const { return shape_size(shape()); }

const std::vector<double>& Tensor::data() const {
    if (!impl_) throw ValueError("use of undefined tensor");
    return *impl_->data;
}

std::vector<double>& Tensor::data_mut() {
    if (!impl_) throw ValueError("use of undefined tensor");
    return *impl_->data;
}

double Tensor::item() const {
    if (size() != 1) throw DimensionError("item() requires a single-element tensor");
    return (*impl_->data)[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    const Shape& s = shape();
    if (s.size() != 2) throw DimensionError("at(r, c) requires a rank-2 tensor");
    return (*impl_->data)[r * s[1] + c];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
    if (!impl_) throw ValueError("use of undefined tensor");
    impl_->requires_grad = on;
    if (on && !impl_->node) {
        auto node = std::make_shared<Node>();
        node->seq = ++g_seq;
        node->op = "leaf";
        impl_->node = std::move(node);
    }
    return *this;
}

std::shared_ptr<Node> Tensor::node() const { return impl_ ? impl_->node : nullptr; }

Tensor Tensor::detach() const {
    Tensor t;
    if (impl_) {
        t.impl_ = std::make_shared<Impl>();
        t.impl_->shape = impl_->shape;
        t.impl_->data = impl_->data;
    }
    return t;
}

Tensor Tensor::clone() const {
    Tensor t;
    if (impl_) {
        t.impl_ = std::make_shared<Impl>();
        t.impl_->shape = impl_->shape;
        t.impl_->data = std::make_shared<std::vector<double>>(*impl_->data);
    }
    return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape);
    if (shape_size(shape) != values.size()) {
        throw DimensionError("data length does not match shape");
    }
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = std::move(shape);
    t.impl_->data = std::make_shared<std::vector<double>>(std::move(values));
    if (requires_grad) t.set_requires_grad(true);
    return t;
}

Tensor Tensor::zeros(Shape shape) {
    auto n = shape_size(shape);
    return from_data(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::ones(Shape shape) {
    auto n = shape_size(shape);
    return from_data(std::move(shape), std::vector<double>(n, 1.0));
}

Tensor Tensor::full(Shape shape, double value) {
    auto n = shape_size(shape);
    return from_data(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

Tensor Tensor::randn(Shape shape, Rng& rng, bool requires_grad) {
    auto n = shape_size(shape);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return from_data(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::rand_uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad) {
    auto n = shape_size(shape);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return from_data(std::move(shape), std::move(v), requires_grad);
}

// --- op construction ---------------------------------------------------------

Tensor make_op_result(Shape shape, std::vector<double> values, const char* op,
                      std::vector<Tensor> inputs,
                      std::function<std::vector<Tensor>(const Tensor&)> backward_fn) {
    check_finite(op, values);
    Tensor t = Tensor::from_data(std::move(shape), std::move(values));
    bool needs_graph = false;
    if (g_grad_enabled) {
        for (const auto& in : inputs) {
            if (in.requires_grad()) {
                needs_graph = true;
                break;
            }
        }
    }
    if (needs_graph) {
        auto node = std::make_shared<Node>();
        node->seq = ++g_seq;
        node->op = op;
        node->inputs = std::move(inputs);
        node->backward = std::move(backward_fn);
        t.impl_->node = std::move(node);
        t.impl_->requires_grad = true;
    }
    return t;
}

namespace {

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
    const std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (da != db && da != 1 && db != 1) {
            throw DimensionError(std::string("shapes not broadcastable in op '") + op + "'");
        }
        out[i] = std::max(da, db);
    }
    return out;
}

// Row-major strides right-aligned against `out`, 0 on broadcast dims.
std::vector<std::ptrdiff_t> broadcast_strides(const Shape& in, const Shape& out) {
    std::vector<std::ptrdiff_t> strides(out.size(), 0);
    std::ptrdiff_t s = 1;
    const std::size_t off = out.size() - in.size();
    for (std::size_t i = in.size(); i-- > 0;) {
        strides[off + i] = (in[i] == 1 && out[off + i] != 1) ? 0 : s;
        s *= static_cast<std::ptrdiff_t>(in[i]);
    }
    return strides;
}

Tensor binary_elementwise(kernels::Binary kop, const char* name, const Tensor& a, const Tensor& b,
                          std::function<std::vector<Tensor>(const Tensor&)> backward_fn) {
    const Shape out_shape = broadcast_shape(a.shape(), b.shape(), name);
    const std::size_t total = shape_size(out_shape);
    std::vector<double> out(total);
    if (a.shape() == b.shape()) {
        kernels::binary_op_dense(kop, a.data().data(), b.data().data(), out.data(), total);
    } else {
        auto astr = broadcast_strides(a.shape(), out_shape);
        auto bstr = broadcast_strides(b.shape(), out_shape);
        kernels::binary_op(kop, a.data().data(), b.data().data(), out.data(),
                           out_shape.data(), astr.data(), bstr.data(), out_shape.size(), total);
    }
    return make_op_result(out_shape, std::move(out), name, {a, b}, std::move(backward_fn));
}

Tensor unary_elementwise(kernels::Unary kop, const char* name, const Tensor& x,
                         std::function<std::vector<Tensor>(const Tensor&)> backward_fn) {
    std::vector<double> out(x.size());
    kernels::unary_op(kop, x.data().data(), out.data(), x.size());
    return make_op_result(x.shape(), std::move(out), name, {x}, std::move(backward_fn));
}

} // namespace

Tensor reduce_to(const Tensor& g, const Shape& target) {
    if (g.shape() == target) return g;
    Tensor r = g;
    // Sum away leading extra axes.
    while (r.ndim() > target.size()) r = sum(r, {0});
    // Sum axes that were broadcast up from 1.
    std::vector<std::size_t> axes;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] == 1 && r.shape()[i] != 1) axes.push_back(i);
    }
    if (!axes.empty()) r = sum(r, axes, /*keepdims=*/true);
    if (r.shape() != target) r = reshape(r, target);
    return r;
}

// --- elementwise ops ---------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_elementwise(kernels::Binary::Add, "add", a, b, [a, b](const Tensor& g) {
        return std::vector<Tensor>{reduce_to(g, a.shape()), reduce_to(g, b.shape())};
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_elementwise(kernels::Binary::Sub, "sub", a, b, [a, b](const Tensor& g) {
        return std::vector<Tensor>{reduce_to(g, a.shape()), reduce_to(neg(g), b.shape())};
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_elementwise(kernels::Binary::Mul, "mul", a, b, [a, b](const Tensor& g) {
        return std::vector<Tensor>{reduce_to(mul(g, b), a.shape()),
                                   reduce_to(mul(g, a), b.shape())};
    });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_elementwise(kernels::Binary::Div, "div", a, b, [a, b](const Tensor& g) {
        Tensor ga = div(g, b);
        Tensor gb = neg(div(mul(g, a), mul(b, b)));
        return std::vector<Tensor>{reduce_to(ga, a.shape()), reduce_to(gb, b.shape())};
    });
}

Tensor neg(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Neg, "neg", x, [](const Tensor& g) {
        return std::vector<Tensor>{neg(g)};
    });
}

Tensor square(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Square, "square", x, [x](const Tensor& g) {
        return std::vector<Tensor>{mul(mul(g, Tensor::scalar(2.0)), x)};
    });
}

Tensor sqrt(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Sqrt, "sqrt", x, [x](const Tensor& g) {
        return std::vector<Tensor>{div(mul(g, Tensor::scalar(0.5)), sqrt(x))};
    });
}

Tensor sin(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Sin, "sin", x, [x](const Tensor& g) {
        return std::vector<Tensor>{mul(g, cos(x))};
    });
}

Tensor cos(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Cos, "cos", x, [x](const Tensor& g) {
        return std::vector<Tensor>{neg(mul(g, sin(x)))};
    });
}

Tensor tanh(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Tanh, "tanh", x, [x](const Tensor& g) {
        Tensor t = tanh(x);
        return std::vector<Tensor>{mul(g, sub(Tensor::scalar(1.0), square(t)))};
    });
}

Tensor exp(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Exp, "exp", x, [x](const Tensor& g) {
        return std::vector<Tensor>{mul(g, exp(x))};
    });
}

Tensor log(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Log, "log", x, [x](const Tensor& g) {
        return std::vector<Tensor>{div(g, x)};
    });
}

Tensor sigmoid(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Sigmoid, "sigmoid", x, [x](const Tensor& g) {
        Tensor s = sigmoid(x);
        return std::vector<Tensor>{mul(g, mul(s, sub(Tensor::scalar(1.0), s)))};
    });
}

Tensor softplus(const Tensor& x) {
    return unary_elementwise(kernels::Unary::Softplus, "softplus", x, [x](const Tensor& g) {
        return std::vector<Tensor>{mul(g, sigmoid(x))};
    });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    std::vector<double> out(x.size());
    kernels::leaky_relu(x.data().data(), out.data(), x.size(), slope);
    return make_op_result(x.shape(), std::move(out), "leaky_relu", {x}, [x, slope](const Tensor& g) {
        // The slope mask is piecewise constant in x, so it enters as data.
        std::vector<double> m(x.size());
        const auto& xd = x.data();
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = xd[i] > 0.0 ? 1.0 : slope;
        return std::vector<Tensor>{mul(g, Tensor::from_data(x.shape(), std::move(m)))};
    });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
    std::vector<double> out(x.size());
    kernels::clamp(x.data().data(), out.data(), x.size(), lo, hi);
    return make_op_result(x.shape(), std::move(out), "clamp", {x}, [x, lo, hi](const Tensor& g) {
        std::vector<double> m(x.size());
        const auto& xd = x.data();
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = (xd[i] >= lo && xd[i] <= hi) ? 1.0 : 0.0;
        return std::vector<Tensor>{mul(g, Tensor::from_data(x.shape(), std::move(m)))};
    });
}

Tensor elementwise(EwOp op, const Tensor& a, const Tensor* b, double slope) {
    auto need_b = [&]() -> const Tensor& {
        if (!b) throw ValueError("binary elementwise op requires a second operand");
        return *b;
    };
    switch (op) {
        case EwOp::Add: return add(a, need_b());
        case EwOp::Sub: return sub(a, need_b());
        case EwOp::Mul: return mul(a, need_b());
        case EwOp::Div: return div(a, need_b());
        case EwOp::Square: return square(a);
        case EwOp::Sin: return sin(a);
        case EwOp::Cos: return cos(a);
        case EwOp::Tanh: return tanh(a);
        case EwOp::LeakyRelu: return leaky_relu(a, slope);
        case EwOp::Exp: return exp(a);
        case EwOp::Log: return log(a);
        case EwOp::Sigmoid: return sigmoid(a);
    }
    throw ValueError("unknown elementwise op");
}

// --- shape ops ---------------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape) {
    check_shape(shape);
    if (shape_size(shape) != x.size()) throw DimensionError("reshape changes element count");
    std::vector<double> out(x.data());
    Shape in_shape = x.shape();
    return make_op_result(std::move(shape), std::move(out), "reshape", {x},
                          [x, in_shape](const Tensor& g) {
                              return std::vector<Tensor>{reshape(g, in_shape)};
                          });
}

Tensor transpose(const Tensor& x) {
    const Shape& s = x.shape();
    if (s.size() != 2) throw DimensionError("transpose requires a rank-2 tensor");
    const std::size_t r = s[0], c = s[1];
    std::vector<double> out(r * c);
    const auto& in = x.data();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
    }
    return make_op_result({c, r}, std::move(out), "transpose", {x}, [](const Tensor& g) {
        return std::vector<Tensor>{transpose(g)};
    });
}

namespace {

// outer x extent x inner decomposition of `axis` in a row-major tensor
struct AxisSplit {
    std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
    AxisSplit sp;
    sp.extent = s[axis];
    for (std::size_t i = 0; i < axis; ++i) sp.outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
    return sp;
}

} // namespace

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len) {
    const Shape& s = x.shape();
    if (axis >= s.size()) throw DimensionError("slice axis out of range");
    if (len == 0 || start + len > s[axis]) throw DimensionError("slice range out of bounds");
    const AxisSplit sp = split_axis(s, axis);
    Shape out_shape = s;
    out_shape[axis] = len;
    std::vector<double> out(shape_size(out_shape));
    const auto& in = x.data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
        const double* src = in.data() + (o * sp.extent + start) * sp.inner;
        std::memcpy(out.data() + o * len * sp.inner, src, len * sp.inner * sizeof(double));
    }
    const std::size_t after = s[axis] - start - len;
    return make_op_result(std::move(out_shape), std::move(out), "slice", {x},
                          [axis, start, after](const Tensor& g) {
                              return std::vector<Tensor>{pad_axis(g, axis, start, after)};
                          });
}

Tensor pad_axis(const Tensor& x, std::size_t axis, std::size_t before, std::size_t after) {
    const Shape& s = x.shape();
    if (axis >= s.size()) throw DimensionError("pad axis out of range");
    const AxisSplit sp = split_axis(s, axis);
    Shape out_shape = s;
    out_shape[axis] += before + after;
    std::vector<double> out(shape_size(out_shape), 0.0);
    const auto& in = x.data();
    const std::size_t ext_out = out_shape[axis];
    for (std::size_t o = 0; o < sp.outer; ++o) {
        double* dst = out.data() + (o * ext_out + before) * sp.inner;
        std::memcpy(dst, in.data() + o * sp.extent * sp.inner, sp.extent * sp.inner * sizeof(double));
    }
    const std::size_t len = s[axis];
    return make_op_result(std::move(out_shape), std::move(out), "pad_axis", {x},
                          [axis, before, len](const Tensor& g) {
                              return std::vector<Tensor>{slice(g, axis, before, len)};
                          });
}

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() != sb.size() || axis >= sa.size()) {
        throw DimensionError("concat rank mismatch");
    }
    for (std::size_t i = 0; i < sa.size(); ++i) {
        if (i != axis && sa[i] != sb[i]) throw DimensionError("concat off-axis dims must match");
    }
    const AxisSplit spa = split_axis(sa, axis);
    Shape out_shape = sa;
    out_shape[axis] = sa[axis] + sb[axis];
    std::vector<double> out(shape_size(out_shape));
    const std::size_t ea = sa[axis], eb = sb[axis];
    for (std::size_t o = 0; o < spa.outer; ++o) {
        std::memcpy(out.data() + o * (ea + eb) * spa.inner,
                    a.data().data() + o * ea * spa.inner, ea * spa.inner * sizeof(double));
        std::memcpy(out.data() + (o * (ea + eb) + ea) * spa.inner,
                    b.data().data() + o * eb * spa.inner, eb * spa.inner * sizeof(double));
    }
    return make_op_result(std::move(out_shape), std::move(out), "concat", {a, b},
                          [axis, ea, eb](const Tensor& g) {
                              return std::vector<Tensor>{slice(g, axis, 0, ea),
                                                         slice(g, axis, ea, eb)};
                          });
}

Tensor gather_rows(const Tensor& x, std::vector<std::size_t> idx) {
    const Shape& s = x.shape();
    if (s.size() != 2) throw DimensionError("gather_rows requires a rank-2 tensor");
    for (auto i : idx) {
        if (i >= s[0]) throw DimensionError("gather_rows index out of range");
    }
    const std::size_t w = s[1], n = s[0];
    std::vector<double> out(idx.size() * w);
    kernels::gather_rows(x.data().data(), idx.data(), out.data(), idx.size(), w);
    Shape out_shape{idx.size(), w};
    return make_op_result(std::move(out_shape), std::move(out), "gather_rows", {x},
                          [idx = std::move(idx), n](const Tensor& g) {
                              return std::vector<Tensor>{scatter_rows(g, idx, n)};
                          });
}

Tensor scatter_rows(const Tensor& x, std::vector<std::size_t> idx, std::size_t n_rows) {
    const Shape& s = x.shape();
    if (s.size() != 2 || s[0] != idx.size()) throw DimensionError("scatter_rows shape mismatch");
    for (auto i : idx) {
        if (i >= n_rows) throw DimensionError("scatter_rows index out of range");
    }
    const std::size_t w = s[1];
    std::vector<double> out(n_rows * w, 0.0);
    const auto& in = x.data();
    // Serial accumulation in row order keeps duplicate-index sums deterministic.
    for (std::size_t r = 0; r < idx.size(); ++r) {
        double* dst = out.data() + idx[r] * w;
        const double* src = in.data() + r * w;
        for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
    }
    Shape out_shape{n_rows, w};
    return make_op_result(std::move(out_shape), std::move(out), "scatter_rows", {x},
                          [idx = std::move(idx)](const Tensor& g) {
                              return std::vector<Tensor>{gather_rows(g, idx)};
                          });
}

// --- matmul -------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() != 2 || sb.size() != 2) throw DimensionError("matmul requires rank-2 tensors");
    if (sa[1] != sb[0]) throw DimensionError("matmul inner dimensions disagree");
    const std::size_t m = sa[0], k = sa[1], n = sb[1];
    std::vector<double> out(m * n);
    kernels::matmul(a.data().data(), b.data().data(), out.data(), m, k, n);
    return make_op_result({m, n}, std::move(out), "matmul", {a, b}, [a, b](const Tensor& g) {
        return std::vector<Tensor>{matmul(g, transpose(b)), matmul(transpose(a), g)};
    });
}

// --- reductions ----------------------------------------------------------------

namespace {

Tensor sum_one_axis(const Tensor& x, std::size_t axis) {
    const Shape& s = x.shape();
    const AxisSplit sp = split_axis(s, axis);
    Shape out_shape = s;
    out_shape[axis] = 1;
    std::vector<double> out(sp.outer * sp.inner);
    // Group (o, i): sum over j of in[(o * extent + j) * inner + i].
    for (std::size_t o = 0; o < sp.outer; ++o) {
        kernels::sum_groups(x.data().data() + o * sp.extent * sp.inner,
                            out.data() + o * sp.inner, sp.inner, sp.extent, 1, sp.inner);
    }
    return Tensor::from_data(std::move(out_shape), std::move(out));
}

} // namespace

Tensor sum(const Tensor& x, std::vector<std::size_t> axes, bool keepdims) {
    const Shape& s = x.shape();
    if (axes.empty()) {
        axes.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) axes[i] = i;
    }
    std::sort(axes.begin(), axes.end());
    if (std::adjacent_find(axes.begin(), axes.end()) != axes.end()) {
        throw DimensionError("duplicate reduction axis");
    }
    for (auto ax : axes) {
        if (ax >= s.size()) throw DimensionError("reduction axis out of range");
    }

    Shape kept = s;  // keepdims-style shape
    std::vector<double> vals;
    if (axes.size() == s.size()) {
        vals = {kernels::sum_all(x.data().data(), x.size())};
        for (auto& d : kept) d = 1;
    } else {
        Tensor acc = x.detach();
        for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
            acc = sum_one_axis(acc, *it);
            kept[*it] = 1;
        }
        vals = acc.data();
    }

    Shape out_shape;
    if (keepdims) {
        out_shape = kept;
    } else {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (std::find(axes.begin(), axes.end(), i) == axes.end()) out_shape.push_back(s[i]);
        }
        if (out_shape.empty()) out_shape = {1};
    }

    Shape in_shape = s;
    return make_op_result(out_shape, std::move(vals), "sum", {x},
                          [x, in_shape, kept](const Tensor& g) {
                              Tensor gk = reshape(g, kept);
                              return std::vector<Tensor>{mul(gk, Tensor::ones(in_shape))};
                          });
}

Tensor mean(const Tensor& x, std::vector<std::size_t> axes, bool keepdims) {
    const Shape& s = x.shape();
    std::size_t count = 1;
    if (axes.empty()) {
        count = x.size();
    } else {
        for (auto ax : axes) {
            if (ax >= s.size()) throw DimensionError("reduction axis out of range");
            count *= s[ax];
        }
    }
    return mul(sum(x, std::move(axes), keepdims), Tensor::scalar(1.0 / static_cast<double>(count)));
}

Tensor reduce(ReduceOp op, const Tensor& x, std::vector<std::size_t> axes, bool keepdims) {
    switch (op) {
        case ReduceOp::Sum: return sum(x, std::move(axes), keepdims);
        case ReduceOp::Mean: return mean(x, std::move(axes), keepdims);
    }
    throw ValueError("unknown reduce op");
}

// --- backward -------------------------------------------------------------------

std::vector<Tensor> backward(const Tensor& output, const std::vector<Tensor>& wrt,
                             bool create_graph) {
    if (output.size() != 1) {
        throw DimensionError("backward requires a single-element output");
    }

    auto zeros_out = [&]() {
        std::vector<Tensor> out;
        out.reserve(wrt.size());
        for (const auto& w : wrt) out.push_back(Tensor::zeros(w.shape()));
        return out;
    };

    auto root = output.node();
    if (!root) {
        if (checked()) {
            std::fputs("gasp: backward on a graph-disconnected output, returning zeros\n", stderr);
        }
        return zeros_out();
    }

    // Reachable subgraph, then reverse topological order by sequence number.
    std::vector<Node*> order;
    {
        std::unordered_set<Node*> seen;
        std::vector<Node*> stack{root.get()};
        seen.insert(root.get());
        while (!stack.empty()) {
            Node* n = stack.back();
            stack.pop_back();
            order.push_back(n);
            for (const auto& in : n->inputs) {
                if (auto p = in.node(); p && seen.insert(p.get()).second) {
                    stack.push_back(p.get());
                }
            }
        }
        std::sort(order.begin(), order.end(),
                  [](const Node* a, const Node* b) { return a->seq > b->seq; });
    }

    std::unordered_map<const Node*, Tensor> grads;
    grads.emplace(root.get(), Tensor::ones(output.shape()));

    {
        GradGuard guard(create_graph);
        for (Node* n : order) {
            auto it = grads.find(n);
            if (it == grads.end() || !n->backward) continue;
            std::vector<Tensor> gin = n->backward(it->second);
            for (std::size_t i = 0; i < n->inputs.size(); ++i) {
                auto in_node = n->inputs[i].node();
                if (!in_node) continue;
                auto found = grads.find(in_node.get());
                if (found == grads.end()) {
                    grads.emplace(in_node.get(), gin[i]);
                } else {
                    found->second = add(found->second, gin[i]);
                }
            }
        }
    }

    std::vector<Tensor> result;
    result.reserve(wrt.size());
    for (const auto& w : wrt) {
        auto n = w.node();
        if (n) {
            auto it = grads.find(n.get());
            if (it != grads.end()) {
                result.push_back(it->second);
                continue;
            }
        }
        if (checked()) {
            std::fputs("gasp: wrt tensor not reachable from output, returning zero gradient\n",
                       stderr);
        }
        result.push_back(Tensor::zeros(w.shape()));
    }
    return result;
}

// --- batch norm -------------------------------------------------------------------

BatchNormState BatchNormState::make(std::size_t features) {
    BatchNormState st;
    st.gamma = Tensor::ones({features});
    st.gamma.set_requires_grad(true);
    st.beta = Tensor::zeros({features});
    st.beta.set_requires_grad(true);
    st.running_mean = Tensor::zeros({features});
    st.running_var = Tensor::ones({features});
    return st;
}

BatchNormState BatchNormState::clone() const {
    BatchNormState st;
    st.gamma = gamma.clone();
    st.gamma.set_requires_grad(true);
    st.beta = beta.clone();
    st.beta.set_requires_grad(true);
    st.running_mean = running_mean.clone();
    st.running_var = running_var.clone();
    return st;
}

Tensor batch_norm(const Tensor& x, BatchNormState& state, bool training,
                  double momentum, double eps) {
    const Shape& s = x.shape();
    if (s.size() != 2) throw DimensionError("batch_norm requires [batch x features]");
    if (s[1] != state.gamma.size()) throw DimensionError("batch_norm feature count mismatch");

    Tensor normalized;
    if (training) {
        if (s[0] < 2) throw ValueError("batch_norm training mode requires batch >= 2");
        Tensor mu = mean(x, {0});                       // [F]
        Tensor centered = sub(x, mu);                   // broadcast over batch
        Tensor var = mean(square(centered), {0});       // biased
        normalized = div(centered, sqrt(add(var, Tensor::scalar(eps))));
        {
            NoGradGuard ng(false);
            auto& rm = state.running_mean.data_mut();
            auto& rv = state.running_var.data_mut();
            const auto& md = mu.data();
            const auto& vd = var.data();
            for (std::size_t f = 0; f < rm.size(); ++f) {
                rm[f] = momentum * rm[f] + (1.0 - momentum) * md[f];
                rv[f] = momentum * rv[f] + (1.0 - momentum) * vd[f];
            }
        }
    } else {
        Tensor mu = state.running_mean.detach();
        Tensor var = state.running_var.detach();
        normalized = div(sub(x, mu), sqrt(add(var, Tensor::scalar(eps))));
    }
    return add(mul(normalized, state.gamma), state.beta);
}

} // namespace gasp
