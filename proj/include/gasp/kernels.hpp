#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Dense numeric inner loops. Every kernel has an OpenMP variant and a serial
// reference; both compute each output element with the same fixed-order inner
// loop, so results are bitwise identical regardless of thread count. The
// parallel variants fall back to the serial path below a work threshold.

namespace gasp::kernels {

void set_parallel(bool enabled);
bool parallel_enabled();

enum class Unary {
    Neg,
    Square,
    Sqrt,
    Sin,
    Cos,
    Tanh,
    Exp,
    Log,
    Sigmoid,
    Softplus,
};

enum class Binary {
    Add,
    Sub,
    Mul,
    Div,
};

// c[m x n] = a[m x k] * b[k x n]
void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void matmul_serial(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

void unary_op(Unary op, const double* in, double* out, std::size_t n);
void unary_op_serial(Unary op, const double* in, double* out, std::size_t n);

void leaky_relu(const double* in, double* out, std::size_t n, double slope);
void leaky_relu_serial(const double* in, double* out, std::size_t n, double slope);

void clamp(const double* in, double* out, std::size_t n, double lo, double hi);

// Strided broadcasting binary op: out has `rank` dims of extent `dims`;
// a/b are addressed through `astr`/`bstr` (0 stride on broadcast dims).
void binary_op(Binary op, const double* a, const double* b, double* out,
               const std::size_t* dims, const std::ptrdiff_t* astr,
               const std::ptrdiff_t* bstr, std::size_t rank, std::size_t total);
void binary_op_serial(Binary op, const double* a, const double* b, double* out,
                      const std::size_t* dims, const std::ptrdiff_t* astr,
                      const std::ptrdiff_t* bstr, std::size_t rank, std::size_t total);

// Same-shape fast path.
void binary_op_dense(Binary op, const double* a, const double* b, double* out, std::size_t n);
void binary_op_dense_serial(Binary op, const double* a, const double* b, double* out, std::size_t n);

// Deterministic full sum: fixed 4096-element blocks summed left to right,
// block sums combined in block order. Thread count does not change the result.
double sum_all(const double* in, std::size_t n);
double sum_all_serial(const double* in, std::size_t n);

// Grouped sum for axis reductions: out[g] = sum of `group` consecutive-in-walk
// elements of `in` addressed as in[g * outer_stride + j * inner_stride].
// Used with a pre-permuted index walk from the tensor layer.
void sum_groups(const double* in, double* out, std::size_t groups, std::size_t group,
                std::size_t outer_stride, std::size_t inner_stride);
void sum_groups_serial(const double* in, double* out, std::size_t groups, std::size_t group,
                       std::size_t outer_stride, std::size_t inner_stride);

// Exact brute-force kNN under the l_p metric. For each query, the k smallest
// distances win; ties break by lexicographic point coordinates, then index.
// out_idx[qi * k + j] lists neighbors best-first in that order.
void knn(const double* points, std::size_t n, const double* queries, std::size_t q,
         std::size_t d, std::size_t k, double p, std::size_t* out_idx);
void knn_serial(const double* points, std::size_t n, const double* queries, std::size_t q,
                std::size_t d, std::size_t k, double p, std::size_t* out_idx);

// dist[i] = min(dist[i], ||points_i - points_pick||_p); the farthest-point
// sampling inner update.
void fps_update(const double* points, std::size_t n, std::size_t d, double p,
                std::size_t pick, double* dist);
void fps_update_serial(const double* points, std::size_t n, std::size_t d, double p,
                       std::size_t pick, double* dist);

// out row r = src row idx[r]; rows of width `w`.
void gather_rows(const double* src, const std::size_t* idx, double* out,
                 std::size_t rows, std::size_t w);

// l_p distance between two d-vectors (p >= 1; fast paths for p = 1, 2).
double lp_distance(const double* a, const double* b, std::size_t d, double p);

} // namespace gasp::kernels
