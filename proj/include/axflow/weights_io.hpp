#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "axflow/grid.hpp"

namespace axflow {

// Named tensor bundle. std::map keeps a stable (name-sorted) order so files
// and seeded initialization are reproducible.
using WeightSet = std::map<std::string, Grid>;

// Weight file format: magic "F1DW", u32 tensor count, then per tensor a u16
// name length, the name bytes, u8 rank, rank u32 extents and the f32 payload,
// all little endian.
void save_weights(const WeightSet& weights, const std::string& path);
WeightSet load_weights(const std::string& path);

// Fetch with a clear error naming the missing tensor.
const Grid& weight(const WeightSet& weights, const std::string& name);

}  // namespace axflow
