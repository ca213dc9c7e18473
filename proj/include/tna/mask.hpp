#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tna/nn.hpp"

namespace tna {

// Binary mask over the canonical flat parameter layout; 0 = frozen,
// 1 = trainable.  Sampling is exact-count per layer: layer l with n_l
// parameters gets exactly floor(ratio * n_l) zeros.
struct GradientMask {
    std::vector<std::uint8_t> bits;
    double ratio = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return bits.size(); }
    std::size_t count_zeros() const;
    double observed_ratio() const;
};

GradientMask sample_mask(const NetworkSpec& spec, double ratio, std::uint64_t seed);

// Bitwise complement of m.
GradientMask reverse_mask(const GradientMask& m);

// Zeroes floor(ratio * weight_count) weight entries per layer (biases are
// never pruned) and returns the keep mask whose bits are 0 exactly at the
// pruned coordinates, so masked training keeps them at 0.
GradientMask prune_at_init(LayeredNetwork& net, double ratio, std::uint64_t seed);

// Element-wise product v * m.
ParamVector apply_mask(const ParamVector& v, const GradientMask& m);

// Compact binary sidecar (header: structure hash, ratio, seed; payload:
// bit-packed mask).  load verifies the stored structure hash against spec.
void save_mask(const GradientMask& m, const NetworkSpec& spec, const std::string& path);
GradientMask load_mask(const std::string& path, const NetworkSpec& spec);

}  // namespace tna
