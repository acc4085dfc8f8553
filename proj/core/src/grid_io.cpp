#include "crowdnav/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "json.hpp"

namespace crowdnav::io {

namespace {

constexpr char kMagic[8] = {'C', 'N', 'G', 'R', 'I', 'D', '0', '1'};

static_assert(std::endian::native == std::endian::little, "binary grid codec assumes little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const std::size_t at = out.size();
  out.resize(at + sizeof(T));
  std::memcpy(out.data() + at, &value, sizeof(T));
}

template <typename T>
T take(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("truncated grid file");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_binary(const ProbabilityGrid& grid) {
  const GridSpec& s = grid.spec();
  std::vector<std::uint8_t> out;
  out.reserve(40 + 8 * s.cell_count());
  for (char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  put<double>(out, s.side_length);
  put<std::int32_t>(out, s.resolution);
  put<std::int32_t>(out, 0);
  put<double>(out, s.origin.x());
  put<double>(out, s.origin.y());
  for (double v : grid.values()) put<double>(out, v);
  return out;
}

ProbabilityGrid decode_binary(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kMagic) || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw std::runtime_error("not a binary grid file");
  }
  std::size_t pos = sizeof(kMagic);
  const double side = take<double>(bytes, pos);
  const auto n = take<std::int32_t>(bytes, pos);
  take<std::int32_t>(bytes, pos);
  const double ox = take<double>(bytes, pos);
  const double oy = take<double>(bytes, pos);
  GridSpec spec(side, n, Vec2(ox, oy));
  std::vector<double> values(spec.cell_count());
  for (double& v : values) v = take<double>(bytes, pos);
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes in grid file");
  return ProbabilityGrid(spec, std::move(values));
}

std::string to_json(const ProbabilityGrid& grid) {
  const GridSpec& s = grid.spec();
  nlohmann::json j;
  j["side_length"] = s.side_length;
  j["resolution"] = s.resolution;
  j["origin"] = {s.origin.x(), s.origin.y()};
  j["values"] = std::vector<double>(grid.values().begin(), grid.values().end());
  return j.dump();
}

ProbabilityGrid from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto origin = j.at("origin").get<std::vector<double>>();
  if (origin.size() != 2) throw std::runtime_error("grid origin must have two entries");
  GridSpec spec(j.at("side_length").get<double>(), j.at("resolution").get<int>(),
                Vec2(origin[0], origin[1]));
  return ProbabilityGrid(spec, j.at("values").get<std::vector<double>>());
}

std::vector<std::uint8_t> encode_pgm(const ProbabilityGrid& grid) {
  const int n = grid.spec().resolution;
  const std::string header = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const double peak = grid.max();
  for (int row = n - 1; row >= 0; --row) {
    for (int col = 0; col < n; ++col) {
      const double v = peak > 0.0 ? grid.at(row, col) / peak : 0.0;
      out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

ProbabilityGrid load_grid(const std::filesystem::path& path) {
  if (path.extension() == ".json") return from_json(read_text(path));
  return decode_binary(read_bytes(path));
}

}  // namespace crowdnav::io
