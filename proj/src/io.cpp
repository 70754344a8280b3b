#include "fdlab/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <unistd.h>

namespace fdlab {

static_assert(std::endian::native == std::endian::little,
              "snapshot sidecars are written in native order and assume little-endian hosts");

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string checksum_string(std::span<const double> values) {
  auto bytes = std::as_bytes(values);
  std::span<const unsigned char> u(reinterpret_cast<const unsigned char*>(bytes.data()),
                                   bytes.size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(u)));
  return buf;
}

json grid_to_json(const Grid& g) {
  json j;
  j["dim"] = g.dim();
  json cells = json::array(), ext = json::array();
  for (int a = 0; a < g.dim(); ++a) {
    cells.push_back(g.cells(a));
    ext.push_back({g.extent(a).lo, g.extent(a).hi});
  }
  j["cells"] = cells;
  j["extents"] = ext;
  j["boundary"] = g.boundary() == Boundary::periodic ? "periodic" : "neumann";
  return j;
}

Grid grid_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto& c = j.at("cells");
  const auto& e = j.at("extents");
  Interval x{e.at(0).at(0).get<double>(), e.at(0).at(1).get<double>()};
  if (dim == 1) return Grid::line(x, c.at(0).get<int>());
  if (dim != 2) throw std::invalid_argument("grid dim must be 1 or 2");
  Interval y{e.at(1).at(0).get<double>(), e.at(1).at(1).get<double>()};
  const Boundary b =
      j.value("boundary", std::string("neumann")) == "periodic" ? Boundary::periodic
                                                                : Boundary::neumann;
  return Grid::box(x, y, c.at(0).get<int>(), c.at(1).get<int>(), b);
}

namespace {

void write_pair(const fs::path& dir, const std::string& stem, const ScalarField& f, double time,
                const std::string& quantity, const std::string& value_units) {
  const auto& v = f.values;
  std::string blob(v.size() * sizeof(double), '\0');
  std::memcpy(blob.data(), v.data(), blob.size());
  write_atomic(dir / (stem + ".bin"), blob);

  json m;
  m["format"] = "fdlab-snapshot";
  m["version"] = 1;
  m["quantity"] = quantity;
  m["grid"] = grid_to_json(f.grid);
  m["time_tag"] = time;
  m["units"] = {{"length", "L"}, {"time", "T"}, {"value", value_units}};
  m["layout"] = "row-major (ny, nx), x fastest";
  m["dtype"] = "float64-le";
  m["data_file"] = stem + ".bin";
  m["count"] = v.size();
  m["checksum"] = checksum_string(v);
  write_atomic(dir / (stem + ".json"), m.dump(2) + "\n");
}

ScalarField read_pair(const fs::path& manifest, double* time) {
  const json m = json::parse(read_text(manifest));
  ScalarField f{grid_from_json(m.at("grid")), {}};
  const std::string blob = read_text(manifest.parent_path() / m.at("data_file").get<std::string>());
  if (blob.size() != f.grid.size() * sizeof(double))
    throw std::runtime_error("snapshot data size does not match its grid: " + manifest.string());
  f.values.resize(f.grid.size());
  std::memcpy(f.values.data(), blob.data(), blob.size());
  if (checksum_string(f.values) != m.at("checksum").get<std::string>())
    throw std::runtime_error("snapshot checksum mismatch: " + manifest.string());
  if (time) *time = m.value("time_tag", 0.0);
  return f;
}

}  // namespace

void write_snapshot(const fs::path& dir, const std::string& stem, const DensityField& f) {
  write_pair(dir, stem, f.scalar(), f.time(), "density", "M/L^d");
}

DensityField read_snapshot(const fs::path& manifest) {
  double t = 0.0;
  ScalarField f = read_pair(manifest, &t);
  return DensityField(std::move(f.grid), std::move(f.values), t);
}

void write_scalar_snapshot(const fs::path& dir, const std::string& stem, const ScalarField& f,
                           double time, const std::string& quantity) {
  write_pair(dir, stem, f, time, quantity, "mixed");
}

ScalarField read_scalar_snapshot(const fs::path& manifest, double* time) {
  return read_pair(manifest, time);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field_csv(const ScalarField& f) {
  std::string out = f.grid.dim() == 2 ? "x,y,value\n" : "x,value\n";
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const Vec2 c = f.grid.center(k);
    out += fmt(c[0]);
    if (f.grid.dim() == 2) out += "," + fmt(c[1]);
    out += "," + fmt(f.values[k]) + "\n";
  }
  return out;
}

}  // namespace fdlab
