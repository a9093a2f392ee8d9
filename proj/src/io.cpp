#include "hslab/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace hslab {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string boundary_csv(const TorusGrid& grid, int components, const Vec& u) {
  const int n = grid.size();
  if (u.size() != static_cast<Index>(components) * n) throw InvalidArgument("boundary_csv: size mismatch");
  std::string out = "x";
  for (int c = 0; c < components; ++c) out += ",re_" + std::to_string(c) + ",im_" + std::to_string(c);
  out += '\n';
  for (int i = 0; i < n; ++i) {
    out += format_double(grid.point(i));
    for (int c = 0; c < components; ++c) {
      const cplx z = u(static_cast<Index>(c) * n + i);
      out += ',' + format_double(z.real()) + ',' + format_double(z.imag());
    }
    out += '\n';
  }
  return out;
}

std::pair<int, Vec> parse_boundary_csv(const TorusGrid& grid, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("boundary CSV is empty");
  const int columns = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (columns < 3 || columns % 2 == 0) throw InvalidArgument("boundary CSV needs x plus (re, im) pairs");
  const int components = (columns - 1) / 2;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw InvalidArgument("boundary CSV: bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (static_cast<int>(row.size()) != columns) throw InvalidArgument("boundary CSV: ragged row");
    rows.push_back(std::move(row));
  }
  const int n = grid.size();
  if (static_cast<int>(rows.size()) != n) {
    throw InvalidArgument("boundary CSV has " + std::to_string(rows.size()) + " rows, grid has " +
                          std::to_string(n));
  }
  Vec u(static_cast<Index>(components) * n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < components; ++c) {
      u(static_cast<Index>(c) * n + i) = cplx(rows[i][1 + 2 * c], rows[i][2 + 2 * c]);
    }
  }
  return {components, u};
}

std::string field_csv(const HalfSpaceField& field) {
  const int n = field.grid.size();
  std::string out = "t,x";
  for (int c = 0; c < field.components; ++c) {
    out += ",re_" + std::to_string(c) + ",im_" + std::to_string(c);
  }
  out += '\n';
  for (int j = 0; j < field.tgrid.size(); ++j) {
    const std::string t = format_double(field.tgrid.node(j));
    for (int i = 0; i < n; ++i) {
      out += t + ',' + format_double(field.grid.point(i));
      for (int c = 0; c < field.components; ++c) {
        const cplx z = field.values[j](static_cast<Index>(c) * n + i);
        out += ',' + format_double(z.real()) + ',' + format_double(z.imag());
      }
      out += '\n';
    }
  }
  return out;
}

std::string norm_rows_csv(const std::vector<std::pair<std::string, double>>& rows,
                          const std::string& config_hash) {
  std::string out = "quantity,value,config_hash\n";
  for (const auto& [name, value] : rows) {
    out += name + ',' + format_double(value) + ',' + config_hash + '\n';
  }
  return out;
}

std::string matrix_dump(const Mat& m) {
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  std::string out(16 + rows * cols * 16, '\0');
  std::memcpy(out.data(), &rows, 8);
  std::memcpy(out.data() + 8, &cols, 8);
  char* p = out.data() + 16;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const double pair[2] = {m(r, c).real(), m(r, c).imag()};
      std::memcpy(p, pair, 16);
      p += 16;
    }
  }
  return out;
}

Mat parse_matrix_dump(const std::string& bytes) {
  if (bytes.size() < 16) throw InvalidArgument("matrix dump truncated");
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::memcpy(&rows, bytes.data(), 8);
  std::memcpy(&cols, bytes.data() + 8, 8);
  if (bytes.size() != 16 + rows * cols * 16) throw InvalidArgument("matrix dump size mismatch");
  Mat m(static_cast<Index>(rows), static_cast<Index>(cols));
  const char* p = bytes.data() + 16;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      double pair[2];
      std::memcpy(pair, p, 16);
      m(r, c) = cplx(pair[0], pair[1]);
      p += 16;
    }
  }
  return m;
}

}  // namespace hslab
