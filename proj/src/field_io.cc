#include "anisolab/field_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace anisolab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field(std::ostream& os, const GridFunction& f) {
  nlohmann::json header = grid_meta(f.grid());
  header["format"] = "anisolab-field";
  header["version"] = 1;
  os << header.dump() << '\n';
  for (double v : f.values()) os << format_double(v) << '\n';
}

GridFunction read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("read_field: missing header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_field: bad header: ") +
                             e.what());
  }
  if (header.value("format", std::string()) != "anisolab-field") {
    throw std::runtime_error("read_field: not an anisolab field file");
  }
  Box box(header.at("box").at("center").get<std::vector<double>>(),
          header.at("box").at("half_widths").get<std::vector<double>>());
  Grid grid(box, header.at("nodes_per_axis").get<std::vector<std::size_t>>());
  std::vector<double> values;
  values.reserve(grid.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  if (values.size() != grid.size()) {
    std::ostringstream msg;
    msg << "read_field: expected " << grid.size() << " values, got "
        << values.size();
    throw std::runtime_error(msg.str());
  }
  return GridFunction(std::move(grid), std::move(values));
}

void write_field(const std::filesystem::path& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_field(os, f);
}

GridFunction read_field(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_field(is);
}

void write_csv_slice(std::ostream& os, const GridFunction& f,
                     const std::vector<std::size_t>& free_axes,
                     std::vector<std::size_t> pinned) {
  const Grid& g = f.grid();
  if (free_axes.empty() || free_axes.size() > 2) {
    throw std::invalid_argument("write_csv_slice: need one or two free axes");
  }
  for (std::size_t a : free_axes) {
    if (a >= g.dim()) throw std::invalid_argument("write_csv_slice: bad axis");
  }
  if (pinned.empty()) {
    for (std::size_t j = 0; j < g.dim(); ++j) pinned.push_back(g.nodes(j) / 2);
  }
  if (pinned.size() != g.dim()) {
    throw std::invalid_argument("write_csv_slice: pinned index count");
  }
  for (std::size_t a : free_axes) os << 'x' << (a + 1) << ',';
  os << "value\n";
  std::vector<std::size_t> idx = pinned;
  const std::size_t a0 = free_axes[0];
  const std::size_t n1 = free_axes.size() == 2 ? g.nodes(free_axes[1]) : 1;
  for (std::size_t i = 0; i < g.nodes(a0); ++i) {
    idx[a0] = i;
    for (std::size_t k = 0; k < n1; ++k) {
      if (free_axes.size() == 2) idx[free_axes[1]] = k;
      for (std::size_t a : free_axes) {
        os << format_double(g.coordinate(a, idx[a])) << ',';
      }
      os << format_double(f[g.linear_index(idx)]) << '\n';
    }
  }
}

}  // namespace anisolab
