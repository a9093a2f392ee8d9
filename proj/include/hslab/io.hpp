#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hslab/analysis_norms.hpp"
#include "hslab/torus_grid.hpp"
#include "hslab/types.hpp"

namespace hslab {

/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Shortest decimal that round-trips the double.
std::string format_double(double value);

/// Header "x,re_0,im_0,...", one row per grid point.
std::string boundary_csv(const TorusGrid& grid, int components, const Vec& u);
/// Inverse of boundary_csv; returns the component count and the samples.
/// The row count must equal the grid size.
std::pair<int, Vec> parse_boundary_csv(const TorusGrid& grid, const std::string& text);

/// Header "t,x,re_0,im_0,...", rows ordered by t then x.
std::string field_csv(const HalfSpaceField& field);

/// (quantity, value, config hash) rows.
std::string norm_rows_csv(const std::vector<std::pair<std::string, double>>& rows,
                          const std::string& config_hash);

/// uint64 rows, uint64 cols, then row-major complex128 pairs, all little-endian.
std::string matrix_dump(const Mat& m);
Mat parse_matrix_dump(const std::string& bytes);

}  // namespace hslab
