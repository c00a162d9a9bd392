#include "gasp/pointcloud.hpp"

#include <cmath>
#include <numeric>

namespace gasp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double grid_axis_coord(std::size_t i, std::size_t extent) {
    if (extent <= 1) return 0.0;
    return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(extent - 1);
}

PointCloud grid_to_pointcloud(const std::vector<double>& values, const GridSpec& spec) {
    if (spec.dims.empty() || spec.channels == 0) throw DimensionError("empty grid spec");
    std::size_t cells = 1;
    for (auto d : spec.dims) {
        if (d == 0) throw DimensionError("grid dims must be positive");
        cells *= d;
    }
    if (values.size() != cells * spec.channels) {
        throw DimensionError("value array does not match grid spec");
    }

    PointCloud pc;
    pc.n = cells;
    pc.d = spec.dims.size();
    pc.k = spec.channels;
    pc.coords.resize(cells * pc.d);
    pc.feats.resize(cells * pc.k);

    std::vector<std::size_t> idx(pc.d, 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        for (std::size_t ax = 0; ax < pc.d; ++ax) {
            pc.coords[cell * pc.d + ax] = grid_axis_coord(idx[ax], spec.dims[ax]);
        }
        for (std::size_t c = 0; c < pc.k; ++c) {
            const double v = values[cell * pc.k + c];
            double f = 0.0;
            switch (spec.kind) {
                case GridKind::Image: f = byte_to_feature(v); break;
                case GridKind::Voxel: f = v != 0.0 ? 1.0 : -1.0; break;
                case GridKind::LatLon:
                    throw ValueError("use latlon_grid_to_pointcloud for lat-lon grids");
            }
            pc.feats[cell * pc.k + c] = f;
        }
        // row-major increment
        for (std::size_t ax = pc.d; ax-- > 0;) {
            if (++idx[ax] < spec.dims[ax]) break;
            idx[ax] = 0;
        }
    }
    return pc;
}

std::vector<double> pointcloud_features_to_grid(const PointCloud& pc, const GridSpec& spec) {
    std::vector<double> out(pc.n * pc.k);
    for (std::size_t i = 0; i < pc.n * pc.k; ++i) {
        const double f = pc.feats[i];
        switch (spec.kind) {
            case GridKind::Image: out[i] = (f + 1.0) * 0.5 * 255.0; break;
            case GridKind::Voxel: out[i] = f > 0.0 ? 1.0 : 0.0; break;
            case GridKind::LatLon: throw ValueError("lat-lon grids keep their own scale");
        }
    }
    return out;
}

std::array<double, 3> latlon_to_sphere(double lat, double lon) {
    if (lat < -kPi / 2 - 1e-12 || lat > kPi / 2 + 1e-12) {
        throw ValueError("latitude out of [-pi/2, pi/2]");
    }
    if (lon < 0.0 || lon >= 2 * kPi) throw ValueError("longitude out of [0, 2pi)");
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

PointCloud latlon_grid_to_pointcloud(const std::vector<double>& values,
                                     std::size_t n_lat, std::size_t n_lon,
                                     double fmin, double fmax) {
    if (n_lat == 0 || n_lon == 0) throw DimensionError("empty lat-lon grid");
    if (values.size() != n_lat * n_lon) throw DimensionError("value array does not match grid");
    if (!(fmax > fmin)) throw ValueError("feature range must satisfy fmax > fmin");

    PointCloud pc;
    pc.n = n_lat * n_lon;
    pc.d = 3;
    pc.k = 1;
    pc.coords.resize(pc.n * 3);
    pc.feats.resize(pc.n);
    for (std::size_t i = 0; i < n_lat; ++i) {
        // evenly spaced latitudes, poles included
        const double lat = -kPi / 2 + kPi * (n_lat == 1 ? 0.5 : static_cast<double>(i) / (n_lat - 1));
        for (std::size_t j = 0; j < n_lon; ++j) {
            const double lon = 2 * kPi * static_cast<double>(j) / static_cast<double>(n_lon);
            const auto xyz = latlon_to_sphere(lat, lon);
            const std::size_t r = i * n_lon + j;
            pc.coords[r * 3 + 0] = xyz[0];
            pc.coords[r * 3 + 1] = xyz[1];
            pc.coords[r * 3 + 2] = xyz[2];
            pc.feats[r] = -1.0 + 2.0 * (values[r] - fmin) / (fmax - fmin);
        }
    }
    return pc;
}

PointCloud subsample(const PointCloud& pc, std::size_t K, std::uint64_t seed) {
    if (K < 1 || K > pc.n) throw ValueError("subsample requires 1 <= K <= n");
    std::vector<std::size_t> idx(pc.n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < K; ++i) {
        const std::size_t j = i + rng.uniform_int(pc.n - i);
        std::swap(idx[i], idx[j]);
    }
    PointCloud out;
    out.n = K;
    out.d = pc.d;
    out.k = pc.k;
    out.coords.resize(K * pc.d);
    out.feats.resize(K * pc.k);
    for (std::size_t r = 0; r < K; ++r) {
        for (std::size_t a = 0; a < pc.d; ++a) out.coords[r * pc.d + a] = pc.coords[idx[r] * pc.d + a];
        for (std::size_t c = 0; c < pc.k; ++c) out.feats[r * pc.k + c] = pc.feats[idx[r] * pc.k + c];
    }
    return out;
}

double byte_to_feature(double v) { return -1.0 + 2.0 * v / 255.0; }

std::uint8_t feature_to_byte(double f) {
    const double v = std::lround((f + 1.0) * 0.5 * 255.0);
    return static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, v)));
}

} // namespace gasp
