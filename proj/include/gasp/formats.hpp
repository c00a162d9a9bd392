#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gasp/pointcloud.hpp"

namespace gasp {

struct ParseError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

struct ImageData {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1; // 1 = PGM, 3 = PPM
    std::vector<std::uint8_t> pixels; // row-major, channels innermost
};

struct VoxelGrid {
    std::size_t depth = 0, height = 0, width = 0;
    std::vector<std::uint8_t> occupancy; // 0/1, row-major D,H,W
};

// Binary P6 (RGB) / P5 (gray), maxval 255. Writers emit the canonical header
// "P6\n{W} {H}\n255\n"; readers also accept comments and loose whitespace.
ImageData read_ppm(const std::string& path);
void write_ppm(const std::string& path, const ImageData& img);
ImageData read_pgm(const std::string& path);
void write_pgm(const std::string& path, const ImageData& img);
ImageData read_image(const std::string& path); // dispatch on magic

// Header "x0,..,x{d-1},y0,..,y{k-1}"; rows of decimal floats printed with
// enough digits to round-trip exactly.
PointCloud read_csv_pointcloud(const std::string& path);
void write_csv_pointcloud(const std::string& path, const PointCloud& pc);

// First line "D H W", then D*H*W space-separated 0/1 values.
VoxelGrid read_voxel_text(const std::string& path);
void write_voxel_text(const std::string& path, const VoxelGrid& grid);

// Plain-text key=value sidecar (feature_min, feature_max, kind).
std::map<std::string, std::string> read_metadata(const std::string& path);
void write_metadata(const std::string& path, const std::map<std::string, std::string>& kv);

PointCloud image_to_pointcloud(const ImageData& img);
ImageData pointcloud_to_image(const PointCloud& pc, std::size_t height, std::size_t width);
PointCloud voxels_to_pointcloud(const VoxelGrid& grid);

} // namespace gasp
