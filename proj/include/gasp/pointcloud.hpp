#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gasp/tensor.hpp"

namespace gasp {

// One datapoint: paired coordinate/feature rows. Coordinates are normalized
// to [-1,1]^d (or the unit sphere for climate grids), features to [-1,1]^k.
struct PointCloud {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t k = 0;
    std::vector<double> coords; // n x d, row-major
    std::vector<double> feats;  // n x k, row-major

    Tensor coords_tensor() const { return Tensor::from_data({n, d}, coords); }
    Tensor feats_tensor() const { return Tensor::from_data({n, k}, feats); }
};

enum class GridKind { Image, Voxel, LatLon };

struct GridSpec {
    std::vector<std::size_t> dims; // H x W or D x H x W
    GridKind kind = GridKind::Image;
    std::size_t channels = 1;
};

// Grid axis of size N: index i -> -1 + 2i/(N-1), endpoints included (N = 1
// maps to 0). Image features rescale [0,255] -> [-1,1]; voxel occupancy
// {0,1} -> {-1,1}. `values` is row-major over dims with channels innermost,
// in storage units.
PointCloud grid_to_pointcloud(const std::vector<double>& values, const GridSpec& spec);

// Inverse of the feature rescaling, back to storage units (no quantization).
std::vector<double> pointcloud_features_to_grid(const PointCloud& pc, const GridSpec& spec);

double grid_axis_coord(std::size_t i, std::size_t extent);

// lat in [-pi/2, pi/2], lon in [0, 2pi) -> unit vector
// (cos(lat) cos(lon), cos(lat) sin(lon), sin(lat)).
std::array<double, 3> latlon_to_sphere(double lat, double lon);

// Lat-lon temperature grid to a sphere point cloud; features normalized to
// [-1,1] against the dataset-global [fmin, fmax] from the sidecar metadata.
PointCloud latlon_grid_to_pointcloud(const std::vector<double>& values,
                                     std::size_t n_lat, std::size_t n_lon,
                                     double fmin, double fmax);

// K rows drawn uniformly without replacement; pairing preserved.
PointCloud subsample(const PointCloud& pc, std::size_t K, std::uint64_t seed);

// [0,255] <-> [-1,1] helpers for image I/O.
double byte_to_feature(double v);
std::uint8_t feature_to_byte(double f);

} // namespace gasp
