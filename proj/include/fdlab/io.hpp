#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fdlab/fields.hpp"

namespace fdlab {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Writes `content` to `path` through a temporary file in the same directory
// followed by a rename, so readers never observe a partial file.
void write_atomic(const fs::path& path, std::string_view content);
std::string read_text(const fs::path& path);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::string checksum_string(std::span<const double> values);

json grid_to_json(const Grid& g);
Grid grid_from_json(const json& j);

// Snapshot pair: <stem>.json manifest plus <stem>.bin of little-endian
// float64 values in the grid's storage order.
void write_snapshot(const fs::path& dir, const std::string& stem, const DensityField& f);
DensityField read_snapshot(const fs::path& manifest);
void write_scalar_snapshot(const fs::path& dir, const std::string& stem, const ScalarField& f,
                           double time, const std::string& quantity);
ScalarField read_scalar_snapshot(const fs::path& manifest, double* time = nullptr);

// "x,value" or "x,y,value" per cell.
std::string field_csv(const ScalarField& f);

// Number formatting shared by every CSV writer (round-trip precision).
std::string fmt(double v);

}  // namespace fdlab
