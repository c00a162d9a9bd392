#include "gasp/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

namespace gasp::kernels {

namespace {

std::atomic<bool> g_parallel{true};

constexpr std::size_t kGrain = 8192;      // min elementwise work per parallel dispatch
constexpr std::size_t kSumBlock = 4096;   // fixed block size for deterministic sums

inline double apply_unary(Unary op, double x) {
    switch (op) {
        case Unary::Neg: return -x;
        case Unary::Square: return x * x;
        case Unary::Sqrt: return std::sqrt(x);
        case Unary::Sin: return std::sin(x);
        case Unary::Cos: return std::cos(x);
        case Unary::Tanh: return std::tanh(x);
        case Unary::Exp: return std::exp(x);
        case Unary::Log: return std::log(x);
        case Unary::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Unary::Softplus:
            // max(x,0) + log1p(exp(-|x|)), stable at both tails
            return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
    }
    return 0.0;
}

inline double apply_binary(Binary op, double a, double b) {
    switch (op) {
        case Binary::Add: return a + b;
        case Binary::Sub: return a - b;
        case Binary::Mul: return a * b;
        case Binary::Div: return a / b;
    }
    return 0.0;
}

inline void matmul_row(const double* a, const double* b, double* c,
                       std::size_t k, std::size_t n, std::size_t i) {
    double* crow = c + i * n;
    std::memset(crow, 0, n * sizeof(double));
    const double* arow = a + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double av = arow[kk];
        const double* brow = b + kk * n;
        for (std::size_t j = 0; j < n; ++j) {
            crow[j] += av * brow[j];
        }
    }
}

inline std::size_t broadcast_offset(std::size_t flat, const std::size_t* dims,
                                    const std::ptrdiff_t* str, std::size_t rank) {
    std::size_t off = 0;
    for (std::size_t ax = rank; ax-- > 0;) {
        const std::size_t c = flat % dims[ax];
        flat /= dims[ax];
        off += c * static_cast<std::size_t>(str[ax]);
    }
    return off;
}

inline double block_sum(const double* in, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += in[i];
    return s;
}

struct KnnCand {
    double dist;
    std::size_t idx;
};

// Total order: nearer first; distance ties prefer the lexicographically
// smaller point, then the smaller index.
inline bool knn_better(const KnnCand& x, const KnnCand& y, const double* points, std::size_t d) {
    if (x.dist != y.dist) return x.dist < y.dist;
    const double* px = points + x.idx * d;
    const double* py = points + y.idx * d;
    for (std::size_t j = 0; j < d; ++j) {
        if (px[j] != py[j]) return px[j] < py[j];
    }
    return x.idx < y.idx;
}

inline void knn_query(const double* points, std::size_t n, const double* query,
                      std::size_t d, std::size_t k, double p, std::size_t* out) {
    // Small k: insertion into a sorted best-first buffer.
    std::vector<KnnCand> best;
    best.reserve(k);
    for (std::size_t i = 0; i < n; ++i) {
        KnnCand c{lp_distance(points + i * d, query, d, p), i};
        if (best.size() < k) {
            auto pos = std::upper_bound(best.begin(), best.end(), c,
                                        [&](const KnnCand& a, const KnnCand& b) {
                                            return knn_better(a, b, points, d);
                                        });
            best.insert(pos, c);
        } else if (knn_better(c, best.back(), points, d)) {
            best.pop_back();
            auto pos = std::upper_bound(best.begin(), best.end(), c,
                                        [&](const KnnCand& a, const KnnCand& b) {
                                            return knn_better(a, b, points, d);
                                        });
            best.insert(pos, c);
        }
    }
    for (std::size_t j = 0; j < k; ++j) out[j] = best[j].idx;
}

} // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

double lp_distance(const double* a, const double* b, std::size_t d, double p) {
    if (p == 2.0) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = a[j] - b[j];
            s += t * t;
        }
        return std::sqrt(s);
    }
    if (p == 1.0) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += std::fabs(a[j] - b[j]);
        return s;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += std::pow(std::fabs(a[j] - b[j]), p);
    return std::pow(s, 1.0 / p);
}

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_row(a, b, c, k, n, i);
}

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    if (!parallel_enabled() || m < 2 || m * k * n < kGrain) {
        matmul_serial(a, b, c, m, k, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        matmul_row(a, b, c, k, n, static_cast<std::size_t>(i));
    }
}

void unary_op_serial(Unary op, const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = apply_unary(op, in[i]);
}

void unary_op(Unary op, const double* in, double* out, std::size_t n) {
    if (!parallel_enabled() || n < kGrain) {
        unary_op_serial(op, in, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        out[i] = apply_unary(op, in[i]);
    }
}

void leaky_relu_serial(const double* in, double* out, std::size_t n, double slope) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : slope * in[i];
}

void leaky_relu(const double* in, double* out, std::size_t n, double slope) {
    if (!parallel_enabled() || n < kGrain) {
        leaky_relu_serial(in, out, n, slope);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        out[i] = in[i] > 0.0 ? in[i] : slope * in[i];
    }
}

void clamp(const double* in, double* out, std::size_t n, double lo, double hi) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::min(std::max(in[i], lo), hi);
}

void binary_op_dense_serial(Binary op, const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = apply_binary(op, a[i], b[i]);
}

void binary_op_dense(Binary op, const double* a, const double* b, double* out, std::size_t n) {
    if (!parallel_enabled() || n < kGrain) {
        binary_op_dense_serial(op, a, b, out, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        out[i] = apply_binary(op, a[i], b[i]);
    }
}

void binary_op_serial(Binary op, const double* a, const double* b, double* out,
                      const std::size_t* dims, const std::ptrdiff_t* astr,
                      const std::ptrdiff_t* bstr, std::size_t rank, std::size_t total) {
    for (std::size_t i = 0; i < total; ++i) {
        out[i] = apply_binary(op, a[broadcast_offset(i, dims, astr, rank)],
                              b[broadcast_offset(i, dims, bstr, rank)]);
    }
}

void binary_op(Binary op, const double* a, const double* b, double* out,
               const std::size_t* dims, const std::ptrdiff_t* astr,
               const std::ptrdiff_t* bstr, std::size_t rank, std::size_t total) {
    if (!parallel_enabled() || total < kGrain) {
        binary_op_serial(op, a, b, out, dims, astr, bstr, rank, total);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i) {
        out[i] = apply_binary(op, a[broadcast_offset(i, dims, astr, rank)],
                              b[broadcast_offset(i, dims, bstr, rank)]);
    }
}

double sum_all_serial(const double* in, std::size_t n) {
    const std::size_t blocks = (n + kSumBlock - 1) / kSumBlock;
    double total = 0.0;
    for (std::size_t bi = 0; bi < blocks; ++bi) {
        total += block_sum(in, bi * kSumBlock, std::min(n, (bi + 1) * kSumBlock));
    }
    return total;
}

double sum_all(const double* in, std::size_t n) {
    const std::size_t blocks = (n + kSumBlock - 1) / kSumBlock;
    if (!parallel_enabled() || blocks < 2) return sum_all_serial(in, n);
    std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(blocks); ++bi) {
        partial[bi] = block_sum(in, bi * kSumBlock, std::min(n, (bi + 1) * kSumBlock));
    }
    double total = 0.0;
    for (std::size_t bi = 0; bi < blocks; ++bi) total += partial[bi];
    return total;
}

void sum_groups_serial(const double* in, double* out, std::size_t groups, std::size_t group,
                       std::size_t outer_stride, std::size_t inner_stride) {
    for (std::size_t g = 0; g < groups; ++g) {
        double s = 0.0;
        const double* base = in + g * outer_stride;
        for (std::size_t j = 0; j < group; ++j) s += base[j * inner_stride];
        out[g] = s;
    }
}

void sum_groups(const double* in, double* out, std::size_t groups, std::size_t group,
                std::size_t outer_stride, std::size_t inner_stride) {
    if (!parallel_enabled() || groups < 2 || groups * group < kGrain) {
        sum_groups_serial(in, out, groups, group, outer_stride, inner_stride);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(groups); ++g) {
        double s = 0.0;
        const double* base = in + g * outer_stride;
        for (std::size_t j = 0; j < group; ++j) s += base[j * inner_stride];
        out[g] = s;
    }
}

void knn_serial(const double* points, std::size_t n, const double* queries, std::size_t q,
                std::size_t d, std::size_t k, double p, std::size_t* out_idx) {
    for (std::size_t qi = 0; qi < q; ++qi) {
        knn_query(points, n, queries + qi * d, d, k, p, out_idx + qi * k);
    }
}

void knn(const double* points, std::size_t n, const double* queries, std::size_t q,
         std::size_t d, std::size_t k, double p, std::size_t* out_idx) {
    if (!parallel_enabled() || q < 2 || n * q < 1024) {
        knn_serial(points, n, queries, q, d, k, p, out_idx);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(q); ++qi) {
        knn_query(points, n, queries + qi * d, d, k, p, out_idx + qi * k);
    }
}

void fps_update_serial(const double* points, std::size_t n, std::size_t d, double p,
                       std::size_t pick, double* dist) {
    const double* pp = points + pick * d;
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = std::min(dist[i], lp_distance(points + i * d, pp, d, p));
    }
}

void fps_update(const double* points, std::size_t n, std::size_t d, double p,
                std::size_t pick, double* dist) {
    if (!parallel_enabled() || n * d < kGrain) {
        fps_update_serial(points, n, d, p, pick, dist);
        return;
    }
    const double* pp = points + pick * d;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        dist[i] = std::min(dist[i], lp_distance(points + i * d, pp, d, p));
    }
}

void gather_rows(const double* src, const std::size_t* idx, double* out,
                 std::size_t rows, std::size_t w) {
    for (std::size_t r = 0; r < rows; ++r) {
        std::memcpy(out + r * w, src + idx[r] * w, w * sizeof(double));
    }
}

} // namespace gasp::kernels
