#include "gasp/formats.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gasp {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

// PNM header token reader: skips whitespace and '#' comments.
std::string pnm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') {
            tok.push_back(static_cast<char>(c));
        }
        if (c == '#') in.unget();
        return tok;
    }
    throw ParseError(path + ": unexpected end of header");
}

ImageData read_pnm(const std::string& path, const char* expect_magic, std::size_t channels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    const std::string magic = pnm_token(in, path);
    if (magic != expect_magic) {
        throw ParseError(path + ": bad magic '" + magic + "', expected " + expect_magic);
    }
    auto parse_dim = [&](const std::string& tok) -> std::size_t {
        try {
            const long v = std::stol(tok);
            if (v <= 0) throw std::invalid_argument("");
            return static_cast<std::size_t>(v);
        } catch (...) {
            throw ParseError(path + ": invalid header field '" + tok + "'");
        }
    };
    ImageData img;
    img.width = parse_dim(pnm_token(in, path));
    img.height = parse_dim(pnm_token(in, path));
    const std::size_t maxval = parse_dim(pnm_token(in, path));
    if (maxval != 255) throw ParseError(path + ": only maxval 255 is supported");
    img.channels = channels;
    img.pixels.resize(img.width * img.height * channels);
    // single whitespace byte separates header from raster, already consumed by token reader?
    // pnm_token stops after the token; the next byte is the separator.
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
        throw ParseError(path + ": truncated raster data");
    }
    return img;
}

void write_pnm(const std::string& path, const ImageData& img, const char* magic,
               std::size_t channels) {
    if (img.channels != channels) throw DimensionError("image channel count mismatch");
    if (img.pixels.size() != img.width * img.height * channels) {
        throw DimensionError("pixel buffer does not match image dims");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << magic << "\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write failed for " + path);
}

} // namespace

ImageData read_ppm(const std::string& path) { return read_pnm(path, "P6", 3); }
void write_ppm(const std::string& path, const ImageData& img) { write_pnm(path, img, "P6", 3); }
ImageData read_pgm(const std::string& path) { return read_pnm(path, "P5", 1); }
void write_pgm(const std::string& path, const ImageData& img) { write_pnm(path, img, "P5", 1); }

ImageData read_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P' && magic[1] == '6') return read_ppm(path);
    if (magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
    throw ParseError(path + ": not a P5/P6 image");
}

PointCloud read_csv_pointcloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) parse_fail(path, 1, "missing header");
    std::size_t d = 0, k = 0;
    {
        std::stringstream ss(line);
        std::string col;
        bool in_features = false;
        while (std::getline(ss, col, ',')) {
            if (!col.empty() && col.front() == 'x' && !in_features) {
                ++d;
            } else if (!col.empty() && col.front() == 'y') {
                in_features = true;
                ++k;
            } else {
                parse_fail(path, 1, "bad header column '" + col + "'");
            }
        }
        if (d == 0 || k == 0) parse_fail(path, 1, "header must list x* then y* columns");
    }
    PointCloud pc;
    pc.d = d;
    pc.k = k;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument("");
            } catch (...) {
                parse_fail(path, lineno, "bad number '" + cell + "'");
            }
        }
        if (row.size() != d + k) parse_fail(path, lineno, "wrong column count");
        for (std::size_t a = 0; a < d; ++a) pc.coords.push_back(row[a]);
        for (std::size_t c = 0; c < k; ++c) pc.feats.push_back(row[d + c]);
        ++pc.n;
    }
    if (pc.n == 0) parse_fail(path, lineno, "no data rows");
    return pc;
}

void write_csv_pointcloud(const std::string& path, const PointCloud& pc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t a = 0; a < pc.d; ++a) out << (a ? ",x" : "x") << a;
    for (std::size_t c = 0; c < pc.k; ++c) out << ",y" << c;
    out << "\n";
    char buf[40];
    for (std::size_t r = 0; r < pc.n; ++r) {
        for (std::size_t a = 0; a < pc.d; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", pc.coords[r * pc.d + a]);
            out << (a ? "," : "") << buf;
        }
        for (std::size_t c = 0; c < pc.k; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", pc.feats[r * pc.k + c]);
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

VoxelGrid read_voxel_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    VoxelGrid g;
    if (!(in >> g.depth >> g.height >> g.width) || g.depth == 0 || g.height == 0 || g.width == 0) {
        parse_fail(path, 1, "expected 'D H W' header with positive dims");
    }
    const std::size_t total = g.depth * g.height * g.width;
    g.occupancy.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        int v;
        if (!(in >> v) || (v != 0 && v != 1)) {
            parse_fail(path, 2, "bad occupancy value at offset " + std::to_string(i));
        }
        g.occupancy[i] = static_cast<std::uint8_t>(v);
    }
    return g;
}

void write_voxel_text(const std::string& path, const VoxelGrid& grid) {
    if (grid.occupancy.size() != grid.depth * grid.height * grid.width) {
        throw DimensionError("occupancy buffer does not match grid dims");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << grid.depth << " " << grid.height << " " << grid.width << "\n";
    for (std::size_t i = 0; i < grid.occupancy.size(); ++i) {
        out << int(grid.occupancy[i]) << ((i + 1) % grid.width == 0 ? "\n" : " ");
    }
    if (!out) throw IoError("write failed for " + path);
}

std::map<std::string, std::string> read_metadata(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) parse_fail(path, lineno, "expected key=value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

void write_metadata(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

PointCloud image_to_pointcloud(const ImageData& img) {
    std::vector<double> values(img.pixels.begin(), img.pixels.end());
    GridSpec spec{{img.height, img.width}, GridKind::Image, img.channels};
    return grid_to_pointcloud(values, spec);
}

ImageData pointcloud_to_image(const PointCloud& pc, std::size_t height, std::size_t width) {
    if (pc.n != height * width) throw DimensionError("point count does not match image dims");
    ImageData img;
    img.width = width;
    img.height = height;
    img.channels = pc.k;
    img.pixels.resize(pc.n * pc.k);
    for (std::size_t i = 0; i < pc.n * pc.k; ++i) img.pixels[i] = feature_to_byte(pc.feats[i]);
    return img;
}

PointCloud voxels_to_pointcloud(const VoxelGrid& grid) {
    std::vector<double> values(grid.occupancy.begin(), grid.occupancy.end());
    GridSpec spec{{grid.depth, grid.height, grid.width}, GridKind::Voxel, 1};
    return grid_to_pointcloud(values, spec);
}

} // namespace gasp
