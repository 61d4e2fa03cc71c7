#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

namespace pinnmg {

/// Nodal scalar field on the unit square. Label "N x N" means (N+1)x(N+1)
/// nodes including the boundary, spacing h = 1/N. Values are row-major with
/// x fastest: value(ix, iy) at (ix*h, iy*h).
struct Grid2D {
  int n = 0;
  std::vector<double> values;

  Grid2D() = default;
  explicit Grid2D(int label_n)
      : n(label_n), values(static_cast<std::size_t>(label_n + 1) * (label_n + 1), 0.0) {}

  int nodes_per_side() const { return n + 1; }
  double h() const { return 1.0 / n; }
  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * (n + 1) + ix]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * (n + 1) + ix]; }
  bool is_boundary(int ix, int iy) const { return ix == 0 || iy == 0 || ix == n || iy == n; }
};

/// Text export: '#'-prefixed provenance lines, a "N,h" header line, then
/// row-major values one row per line.
void write_grid_csv(const Grid2D& g, const std::filesystem::path& path,
                    std::string_view provenance);

/// Raw export: "GRID" magic + u32 N + float64 LE values.
void write_grid_raw(const Grid2D& g, const std::filesystem::path& path);
Grid2D read_grid_raw(const std::filesystem::path& path);

}  // namespace pinnmg
