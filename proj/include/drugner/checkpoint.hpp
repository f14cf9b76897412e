#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drugner/lstm.hpp"
#include "drugner/nn.hpp"

namespace drugner {

struct TensorBlob {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;  // serialized as little-endian f32
};

/// Model checkpoint: text header (kind, config echo, seed) followed by named
/// tensors; payload is little-endian f32, or decimal text in text mode.
struct Checkpoint {
    std::string kind;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<TensorBlob> tensors;

    const std::string* find(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path, bool binary = true);
Checkpoint load_checkpoint(const std::string& path);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

Checkpoint net_to_checkpoint(const nn::Net& net, const std::string& kind, std::uint64_t seed,
                             const ConfigEcho& extra = {});
nn::Net net_from_checkpoint(const Checkpoint& ckpt);

Checkpoint lstm_to_checkpoint(const LstmParams& params, std::uint64_t seed,
                              const ConfigEcho& extra = {});
LstmParams lstm_from_checkpoint(const Checkpoint& ckpt);

}  // namespace drugner
