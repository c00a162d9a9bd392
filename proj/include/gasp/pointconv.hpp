#pragma once

#include "gasp/mlp.hpp"
#include "gasp/pointcloud.hpp"

namespace gasp {

// Exact brute-force k-nearest-neighbor indices, q x k, best first. Distance
// ties break by lexicographic point coordinates, then index. k > n is an error.
std::vector<std::size_t> knn(const std::vector<double>& points, std::size_t n,
                             const std::vector<double>& queries, std::size_t q, std::size_t d,
                             std::size_t k, double norm_p = 2.0);

// Deterministic farthest-point sampling, seeded at the point nearest the
// centroid; distance ties break lexicographically, then by index. Returns
// survivor indices in selection order.
std::vector<std::size_t> farthest_point_sample(const std::vector<double>& points, std::size_t n,
                                               std::size_t d, std::size_t n_keep,
                                               double norm_p = 2.0);

// Content order: rows sorted lexicographically by coordinates, then features.
// Feeding rows through this order makes every downstream reduction independent
// of the caller's row order, which is what turns permutation invariance into a
// bitwise property.
std::vector<std::size_t> canonical_order(const std::vector<double>& coords,
                                         const std::vector<double>& feats, std::size_t n,
                                         std::size_t d, std::size_t k);

// Kernel-generating MLP with batch norm after each hidden affine layer.
struct WeightMlp {
    MlpArchitecture arch; // d -> 16 x4 -> c_out*c_in
    Tensor theta;
    std::vector<BatchNormState> bn; // one per hidden layer

    static WeightMlp make(std::size_t input_dim, std::size_t output_dim, Rng& rng);
    Tensor forward(const Tensor& x, bool training);
    WeightMlp clone() const;
};

struct PointConvLayer {
    std::size_t c_in = 1;
    std::size_t c_out = 1;
    std::size_t k_neighbors = 9;
    double norm_p = 2.0;
    WeightMlp weight_mlp;

    static PointConvLayer make(std::size_t coord_dim, std::size_t c_in, std::size_t c_out,
                               std::size_t k_neighbors, double norm_p, Rng& rng);
    PointConvLayer clone() const;
};

// out[q, o] = sum over neighbor slots j and input channels i of
// kernel[qj, o*c_in + i] * neighbor_feats[qj, i]. Slot order is the kNN order,
// so the summation order is content-determined.
Tensor pointconv_combine(const Tensor& kernel_vals, const Tensor& neighbor_feats, std::size_t q,
                         std::size_t k, std::size_t c_out, std::size_t c_in);

// f_out(x) = sum_{x_i in N_x} W(x_i - x) f_i over the k nearest neighbors of
// each query (k clamped to the point count). Differentiable w.r.t. the weight
// MLP parameters and in_feats.
Tensor pointconv_forward(PointConvLayer& layer, const Tensor& points, const Tensor& in_feats,
                         const Tensor& queries, bool training);

struct PoolResult {
    Tensor points;
    Tensor feats;
};

// Keeps ceil(n / factor) FPS survivors; each survivor's feature is the mean of
// its k nearest input-level neighbors' features.
PoolResult pool_downsample(const Tensor& points, const Tensor& feats, std::size_t factor,
                           std::size_t k, double norm_p = 2.0);

// PointConv layer chain: conv -> batch norm -> leaky relu -> 2^d average-pool
// downsample per stage, then a global mean, affine head and sigmoid.
struct DiscriminatorStack {
    std::size_t coord_dim = 2;
    std::size_t feat_dim = 1;
    std::vector<std::size_t> channels;
    std::size_t k_neighbors = 9; // 3^d by default
    double norm_p = 2.0;
    std::vector<PointConvLayer> layers;
    std::vector<BatchNormState> inter_bn;
    Tensor head_w; // [c_last x 1]
    Tensor head_b; // [1]

    // k_neighbors = 0 selects the 3^d default.
    static DiscriminatorStack make(std::size_t coord_dim, std::size_t feat_dim,
                                   std::vector<std::size_t> channels, std::uint64_t seed,
                                   std::size_t k_neighbors = 0, double norm_p = 2.0);

    std::vector<Tensor> parameters();
    DiscriminatorStack clone() const;
};

// Raw logit of the stack; `discriminate` adds the sigmoid.
Tensor discriminate_logit(DiscriminatorStack& stack, const Tensor& coords, const Tensor& feats,
                          bool training);
Tensor discriminate(DiscriminatorStack& stack, const PointCloud& pc, bool training);

} // namespace gasp
