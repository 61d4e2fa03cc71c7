#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "pinnmg/common.hpp"
#include "pinnmg/problems.hpp"

namespace pinnmg {

enum class Distribution { Uniform, PseudoRandom, Sobol };

const char* to_string(Distribution d);
Distribution distribution_from_string(std::string_view s);

struct BoundaryPoint {
  Point p;
  double value = 0.0;  // Dirichlet datum g at p
};

struct TrainingSet {
  std::vector<Point> interior;          // strictly inside (0,1)^2
  std::vector<BoundaryPoint> boundary;  // on the perimeter of the unit square
  Distribution distribution = Distribution::Sobol;
  std::uint64_t seed = 0;
};

/// First `count` terms of the 2-D Sobol sequence after skipping `skip`
/// terms. Dimension 1 is van der Corput base 2; dimension 2 uses the
/// standard primitive-polynomial direction numbers.
std::vector<Point> sobol2d(std::size_t count, std::size_t skip);

/// Interior shape: either a flat `count` (pseudo-random / sobol) or an
/// nx-by-ny tensor grid (uniform; also accepted as a count for the others).
struct InteriorShape {
  std::size_t count = 0;
  int nx = 0;
  int ny = 0;

  static InteriorShape flat(std::size_t c) { return {c, 0, 0}; }
  static InteriorShape grid(int nx, int ny) {
    return {static_cast<std::size_t>(nx) * ny, nx, ny};
  }
  bool has_grid() const { return nx > 0 && ny > 0; }
};

std::vector<Point> generate_interior(Distribution dist, const InteriorShape& shape,
                                     std::uint64_t seed);

/// `count` points equispaced along the perimeter (count/4 per edge, corners
/// included once), paired with the problem's Dirichlet values.
std::vector<BoundaryPoint> generate_boundary(std::size_t count, const Problem& problem);

TrainingSet make_training_set(Distribution dist, const InteriorShape& shape,
                              std::size_t boundary_count, const Problem& problem,
                              std::uint64_t seed);

}  // namespace pinnmg
