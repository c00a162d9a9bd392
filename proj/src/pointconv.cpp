#include "gasp/pointconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gasp/kernels.hpp"

namespace gasp {

std::vector<std::size_t> knn(const std::vector<double>& points, std::size_t n,
                             const std::vector<double>& queries, std::size_t q, std::size_t d,
                             std::size_t k, double norm_p) {
    if (k == 0 || k > n) throw ValueError("knn requires 1 <= k <= n");
    if (points.size() != n * d || queries.size() != q * d) {
        throw DimensionError("knn: array sizes do not match n/q/d");
    }
    std::vector<std::size_t> idx(q * k);
    kernels::knn(points.data(), n, queries.data(), q, d, k, norm_p, idx.data());
    return idx;
}

namespace {

bool lex_less(const double* a, const double* b, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        if (a[j] != b[j]) return a[j] < b[j];
    }
    return false;
}

} // namespace

std::vector<std::size_t> farthest_point_sample(const std::vector<double>& points, std::size_t n,
                                               std::size_t d, std::size_t n_keep, double norm_p) {
    if (n == 0 || n_keep == 0 || n_keep > n) {
        throw ValueError("farthest_point_sample requires 1 <= n_keep <= n");
    }
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) centroid[j] += points[i * d + j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    // Seed: nearest to the centroid, ties lexicographic then index.
    std::size_t seed = 0;
    double seed_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double dist = kernels::lp_distance(points.data() + i * d, centroid.data(), d, norm_p);
        if (dist < seed_dist ||
            (dist == seed_dist && lex_less(points.data() + i * d, points.data() + seed * d, d))) {
            seed = i;
            seed_dist = dist;
        }
    }

    std::vector<std::size_t> survivors{seed};
    std::vector<bool> taken(n, false);
    taken[seed] = true;
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::size_t last = seed;
    while (survivors.size() < n_keep) {
        kernels::fps_update(points.data(), n, d, norm_p, last, dist.data());
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            if (pick == n || dist[i] > dist[pick] ||
                (dist[i] == dist[pick] &&
                 lex_less(points.data() + i * d, points.data() + pick * d, d))) {
                pick = i;
            }
        }
        survivors.push_back(pick);
        taken[pick] = true;
        last = pick;
    }
    return survivors;
}

std::vector<std::size_t> canonical_order(const std::vector<double>& coords,
                                         const std::vector<double>& feats, std::size_t n,
                                         std::size_t d, std::size_t k) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t j = 0; j < d; ++j) {
            if (coords[a * d + j] != coords[b * d + j]) return coords[a * d + j] < coords[b * d + j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (feats[a * k + c] != feats[b * k + c]) return feats[a * k + c] < feats[b * k + c];
        }
        return a < b;
    });
    return order;
}

WeightMlp WeightMlp::make(std::size_t input_dim, std::size_t output_dim, Rng& rng) {
    WeightMlp w;
    w.arch = MlpArchitecture{input_dim, {16, 16, 16, 16}, output_dim};
    w.theta = init_mlp_params(w.arch, rng);
    w.theta.set_requires_grad(true);
    for (auto h : w.arch.hidden_dims) w.bn.push_back(BatchNormState::make(h));
    return w;
}

Tensor WeightMlp::forward(const Tensor& x, bool training) {
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
        if (l + 1 < dims.size()) {
            h = batch_norm(h, bn[l], training);
            h = leaky_relu(h, kLeakySlope);
        }
    }
    return h;
}

WeightMlp WeightMlp::clone() const {
    WeightMlp w;
    w.arch = arch;
    w.theta = theta.clone();
    w.theta.set_requires_grad(true);
    for (const auto& st : bn) w.bn.push_back(st.clone());
    return w;
}

PointConvLayer PointConvLayer::make(std::size_t coord_dim, std::size_t c_in, std::size_t c_out,
                                    std::size_t k_neighbors, double norm_p, Rng& rng) {
    PointConvLayer layer;
    layer.c_in = c_in;
    layer.c_out = c_out;
    layer.k_neighbors = k_neighbors;
    layer.norm_p = norm_p;
    layer.weight_mlp = WeightMlp::make(coord_dim, c_out * c_in, rng);
    return layer;
}

PointConvLayer PointConvLayer::clone() const {
    PointConvLayer layer;
    layer.c_in = c_in;
    layer.c_out = c_out;
    layer.k_neighbors = k_neighbors;
    layer.norm_p = norm_p;
    layer.weight_mlp = weight_mlp.clone();
    return layer;
}

Tensor pointconv_combine(const Tensor& kernel_vals, const Tensor& neighbor_feats, std::size_t q,
                         std::size_t k, std::size_t c_out, std::size_t c_in) {
    if (kernel_vals.shape() != Shape{q * k, c_out * c_in}) {
        throw DimensionError("pointconv_combine: kernel shape mismatch");
    }
    if (neighbor_feats.shape() != Shape{q * k, c_in}) {
        throw DimensionError("pointconv_combine: feature shape mismatch");
    }
    Tensor w4 = reshape(kernel_vals, {q, k, c_out, c_in});
    Tensor f4 = reshape(neighbor_feats, {q, k, 1, c_in});
    return sum(mul(w4, f4), {1, 3});
}

Tensor pointconv_forward(PointConvLayer& layer, const Tensor& points, const Tensor& in_feats,
                         const Tensor& queries, bool training) {
    if (points.ndim() != 2 || queries.ndim() != 2 || in_feats.ndim() != 2) {
        throw DimensionError("pointconv_forward expects rank-2 tensors");
    }
    const std::size_t n = points.shape()[0];
    const std::size_t d = points.shape()[1];
    const std::size_t q = queries.shape()[0];
    if (queries.shape()[1] != d) throw DimensionError("query dimension mismatch");
    if (in_feats.shape()[0] != n || in_feats.shape()[1] != layer.c_in) {
        throw DimensionError("feature shape does not match layer");
    }
    const std::size_t k = std::min(layer.k_neighbors, n);
    const auto idx = knn(points.data(), n, queries.data(), q, d, k, layer.norm_p);

    std::vector<std::size_t> rep_idx(q * k);
    for (std::size_t i = 0; i < q * k; ++i) rep_idx[i] = i / k;

    Tensor offsets = sub(gather_rows(points, idx), gather_rows(queries, rep_idx));
    Tensor kern = layer.weight_mlp.forward(offsets, training);
    Tensor nf = gather_rows(in_feats, idx);
    return pointconv_combine(kern, nf, q, k, layer.c_out, layer.c_in);
}

PoolResult pool_downsample(const Tensor& points, const Tensor& feats, std::size_t factor,
                           std::size_t k, double norm_p) {
    const std::size_t n = points.shape()[0];
    const std::size_t d = points.shape()[1];
    const std::size_t n_keep = (n + factor - 1) / factor;
    const auto survivors = farthest_point_sample(points.data(), n, d, n_keep, norm_p);

    Tensor new_points = gather_rows(points, survivors);
    const std::size_t k_eff = std::min(k, n);
    const auto idx = knn(points.data(), n, new_points.data(), n_keep, d, k_eff, norm_p);
    Tensor nf = reshape(gather_rows(feats, idx), {n_keep, k_eff, feats.shape()[1]});
    return PoolResult{new_points, mean(nf, {1})};
}

DiscriminatorStack DiscriminatorStack::make(std::size_t coord_dim, std::size_t feat_dim,
                                            std::vector<std::size_t> channels, std::uint64_t seed,
                                            std::size_t k_neighbors, double norm_p) {
    if (channels.empty()) throw ValueError("discriminator needs at least one layer");
    DiscriminatorStack stack;
    stack.coord_dim = coord_dim;
    stack.feat_dim = feat_dim;
    stack.channels = std::move(channels);
    stack.norm_p = norm_p;
    if (k_neighbors == 0) {
        k_neighbors = 1;
        for (std::size_t i = 0; i < coord_dim; ++i) k_neighbors *= 3;
    }
    stack.k_neighbors = k_neighbors;

    Rng rng(seed);
    std::size_t c_in = feat_dim;
    for (auto c_out : stack.channels) {
        stack.layers.push_back(
            PointConvLayer::make(coord_dim, c_in, c_out, k_neighbors, norm_p, rng));
        stack.inter_bn.push_back(BatchNormState::make(c_out));
        c_in = c_out;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(c_in));
    stack.head_w = Tensor::rand_uniform({c_in, 1}, -bound, bound, rng, /*requires_grad=*/true);
    stack.head_b = Tensor::rand_uniform({1}, -bound, bound, rng, /*requires_grad=*/true);
    return stack;
}

std::vector<Tensor> DiscriminatorStack::parameters() {
    std::vector<Tensor> params;
    for (auto& layer : layers) {
        params.push_back(layer.weight_mlp.theta);
        for (auto& st : layer.weight_mlp.bn) {
            params.push_back(st.gamma);
            params.push_back(st.beta);
        }
    }
    for (auto& st : inter_bn) {
        params.push_back(st.gamma);
        params.push_back(st.beta);
    }
    params.push_back(head_w);
    params.push_back(head_b);
    return params;
}

DiscriminatorStack DiscriminatorStack::clone() const {
    DiscriminatorStack stack;
    stack.coord_dim = coord_dim;
    stack.feat_dim = feat_dim;
    stack.channels = channels;
    stack.k_neighbors = k_neighbors;
    stack.norm_p = norm_p;
    for (const auto& layer : layers) stack.layers.push_back(layer.clone());
    for (const auto& st : inter_bn) stack.inter_bn.push_back(st.clone());
    stack.head_w = head_w.clone();
    stack.head_w.set_requires_grad(true);
    stack.head_b = head_b.clone();
    stack.head_b.set_requires_grad(true);
    return stack;
}

Tensor discriminate_logit(DiscriminatorStack& stack, const Tensor& coords, const Tensor& feats,
                          bool training) {
    if (coords.ndim() != 2 || coords.shape()[1] != stack.coord_dim) {
        throw DimensionError("discriminate: coordinate dimension mismatch");
    }
    if (feats.ndim() != 2 || feats.shape()[0] != coords.shape()[0] ||
        feats.shape()[1] != stack.feat_dim) {
        throw DimensionError("discriminate: feature shape mismatch");
    }
    const std::size_t n = coords.shape()[0];
    if (n == 0) throw ValueError("discriminate: empty point cloud");

    const auto order =
        canonical_order(coords.data(), feats.data(), n, stack.coord_dim, stack.feat_dim);
    Tensor pts = gather_rows(coords, order);
    Tensor fts = gather_rows(feats, order);

    const std::size_t factor = std::size_t{1} << stack.coord_dim;
    for (std::size_t li = 0; li < stack.layers.size(); ++li) {
        fts = pointconv_forward(stack.layers[li], pts, fts, pts, training);
        fts = batch_norm(fts, stack.inter_bn[li], training);
        fts = leaky_relu(fts, kLeakySlope);
        PoolResult pooled = pool_downsample(pts, fts, factor, stack.k_neighbors, stack.norm_p);
        pts = pooled.points;
        fts = pooled.feats;
    }
    Tensor pooled = reshape(mean(fts, {0}), {1, fts.shape()[1]});
    return reshape(add(matmul(pooled, stack.head_w), stack.head_b), {1});
}

Tensor discriminate(DiscriminatorStack& stack, const PointCloud& pc, bool training) {
    return sigmoid(discriminate_logit(stack, pc.coords_tensor(), pc.feats_tensor(), training));
}

} // namespace gasp
