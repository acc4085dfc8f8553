#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crowdnav/gridmap.hpp"

namespace crowdnav::io {

// Binary layout (little-endian):
//   bytes 0..7   magic "CNGRID01"
//   f64          side_length
//   i32          resolution n
//   i32          reserved (0)
//   f64 f64      origin x, origin y
//   n*n f64      values, row-major (row = y index)
std::vector<std::uint8_t> encode_binary(const ProbabilityGrid& grid);
ProbabilityGrid decode_binary(const std::vector<std::uint8_t>& bytes);

/// {"side_length": l, "resolution": n, "origin": [x, y], "values": [...]}
std::string to_json(const ProbabilityGrid& grid);
ProbabilityGrid from_json(const std::string& text);

/// 8-bit binary PGM (P5); each value scaled by the grid maximum. Row 0 of the
/// image is the top (largest y) row of the grid.
std::vector<std::uint8_t> encode_pgm(const ProbabilityGrid& grid);

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_file(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Loads a grid from .json or binary depending on the file extension.
ProbabilityGrid load_grid(const std::filesystem::path& path);

}  // namespace crowdnav::io
