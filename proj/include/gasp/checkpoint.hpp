#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gasp/tensor.hpp"

namespace gasp {

struct CheckpointError : Error {
    using Error::Error;
};

// On-disk layout, all integers little-endian:
//   magic "GASP" | version u32 | tensor count u64 |
//   per tensor: name_len u64, name bytes, ndim u64, dims u64..., f64 payload |
//   config_len u64, config UTF-8 "key=value\n" lines |
//   rng seed u64, rng counter u64
struct CheckpointData {
    std::uint32_t version = 1;
    std::vector<std::pair<std::string, Tensor>> tensors;
    std::vector<std::pair<std::string, std::string>> config;
    std::uint64_t rng_seed = 0;
    std::uint64_t rng_counter = 0;

    const Tensor& tensor(const std::string& name) const;
    bool has_key(const std::string& key) const;
    const std::string& value(const std::string& key) const;
    double value_f64(const std::string& key) const;
    std::uint64_t value_u64(const std::string& key) const;
    std::vector<std::size_t> value_dims(const std::string& key) const; // comma list

    void put(std::string key, std::string v);
    void put_f64(std::string key, double v);
    void put_u64(std::string key, std::uint64_t v);
    void put_dims(std::string key, const std::vector<std::size_t>& dims);
};

void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

} // namespace gasp
