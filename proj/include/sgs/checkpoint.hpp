#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgs/optim.hpp"

namespace sgs {

struct StoredArray {
    Shape shape;
    std::vector<double> values;
};

// Binary container: "SGS1", then per entry
//   u32 name length, name bytes, u32 rank, rank x u32 dims, float64 values,
// all little-endian. Each parameter is followed by "<name>.m1", "<name>.m2"
// and a one-element "<name>.step".
void write_checkpoint(const std::filesystem::path& path, const std::vector<const Parameter*>& params);

std::map<std::string, StoredArray> read_checkpoint(const std::filesystem::path& path);

/// Restores values, moments and step counters by name. Missing or misshapen
/// entries raise DataError.
void load_parameters(const std::filesystem::path& path, const std::vector<Parameter*>& params);

}  // namespace sgs
