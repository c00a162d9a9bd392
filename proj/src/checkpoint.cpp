#include "gasp/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gasp {

namespace {

constexpr char kMagic[4] = {'G', 'A', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64_raw(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64_raw(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw CheckpointError(path + ": truncated checkpoint");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace

const Tensor& CheckpointData::tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return t;
    }
    throw CheckpointError("checkpoint is missing tensor '" + name + "'");
}

bool CheckpointData::has_key(const std::string& key) const {
    for (const auto& [k, v] : config) {
        if (k == key) return true;
    }
    return false;
}

const std::string& CheckpointData::value(const std::string& key) const {
    for (const auto& [k, v] : config) {
        if (k == key) return v;
    }
    throw CheckpointError("checkpoint is missing config key '" + key + "'");
}

double CheckpointData::value_f64(const std::string& key) const { return std::stod(value(key)); }

std::uint64_t CheckpointData::value_u64(const std::string& key) const {
    return std::stoull(value(key));
}

std::vector<std::size_t> CheckpointData::value_dims(const std::string& key) const {
    const std::string& s = value(key);
    std::vector<std::size_t> dims;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) dims.push_back(std::stoull(tok));
    }
    return dims;
}

void CheckpointData::put(std::string key, std::string v) {
    config.emplace_back(std::move(key), std::move(v));
}

void CheckpointData::put_f64(std::string key, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    put(std::move(key), buf);
}

void CheckpointData::put_u64(std::string key, std::uint64_t v) {
    put(std::move(key), std::to_string(v));
}

void CheckpointData::put_dims(std::string key, const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s.push_back(',');
        s += std::to_string(dims[i]);
    }
    put(std::move(key), std::move(s));
}

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u64_raw(out, data.tensors.size());
    for (const auto& [name, t] : data.tensors) {
        put_u64_raw(out, name.size());
        out += name;
        const Shape& s = t.shape();
        put_u64_raw(out, s.size());
        for (auto d : s) put_u64_raw(out, d);
        for (double v : t.data()) put_f64(out, v);
    }
    std::string cfg;
    for (const auto& [k, v] : data.config) {
        cfg += k;
        cfg.push_back('=');
        cfg += v;
        cfg.push_back('\n');
    }
    put_u64_raw(out, cfg.size());
    out += cfg;
    put_u64_raw(out, data.rng_seed);
    put_u64_raw(out, data.rng_counter);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot write checkpoint " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("write failed for checkpoint " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open checkpoint " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string buf = ss.str();

    Reader r{buf, 0, path};
    r.need(4);
    if (std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw CheckpointError(path + ": bad checkpoint magic");
    }
    r.pos = 4;
    CheckpointData data;
    data.version = r.u32();
    if (data.version != kVersion) {
        throw CheckpointError(path + ": unsupported checkpoint version " +
                              std::to_string(data.version) + " (expected " +
                              std::to_string(kVersion) + ")");
    }
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t name_len = r.u64();
        std::string name = r.bytes(name_len);
        const std::uint64_t ndim = r.u64();
        Shape shape(ndim);
        std::size_t total = 1;
        for (auto& d : shape) {
            d = r.u64();
            total *= d;
        }
        std::vector<double> vals(total);
        for (auto& v : vals) v = r.f64();
        data.tensors.emplace_back(std::move(name), Tensor::from_data(std::move(shape), std::move(vals)));
    }
    const std::uint64_t cfg_len = r.u64();
    const std::string cfg = r.bytes(cfg_len);
    std::stringstream cs(cfg);
    std::string line;
    while (std::getline(cs, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw CheckpointError(path + ": malformed config entry");
        data.config.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    data.rng_seed = r.u64();
    data.rng_counter = r.u64();
    return data;
}

} // namespace gasp
