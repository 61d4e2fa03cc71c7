#include "pinnmg/sampling.hpp"

#include <bit>
#include <random>
#include <stdexcept>
#include <string>

namespace pinnmg {

const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::Uniform: return "uniform";
    case Distribution::PseudoRandom: return "pseudo-random";
    case Distribution::Sobol: return "sobol";
  }
  return "?";
}

Distribution distribution_from_string(std::string_view s) {
  if (s == "uniform") return Distribution::Uniform;
  if (s == "pseudo-random" || s == "pseudorandom" || s == "random") {
    return Distribution::PseudoRandom;
  }
  if (s == "sobol") return Distribution::Sobol;
  throw std::invalid_argument("unknown distribution: " + std::string(s));
}

namespace {

constexpr int kSobolBits = 32;

// Gray-code Sobol generator, two dimensions. Dimension 1 is van der Corput
// base 2 (all direction numbers m_i = 1); dimension 2 uses the first
// primitive polynomial x^2 + x + 1 (s = 1, a = 0, m_1 = 1), i.e. the
// direction-number recurrence v_i = v_{i-1} ^ (v_{i-1} >> 1).
struct Sobol2 {
  std::uint32_t v1[kSobolBits];
  std::uint32_t v2[kSobolBits];
  std::uint32_t x1 = 0, x2 = 0;
  std::uint64_t index = 0;  // index of the point currently held in x1/x2

  Sobol2() {
    for (int i = 0; i < kSobolBits; ++i) v1[i] = 1u << (31 - i);
    v2[0] = 1u << 31;
    for (int i = 1; i < kSobolBits; ++i) v2[i] = v2[i - 1] ^ (v2[i - 1] >> 1);
  }

  // Advance to the next point: flip the direction of the lowest zero bit of
  // the current index (Gray-code ordering).
  void advance() {
    const int c = std::countr_one(index);
    x1 ^= v1[c];
    x2 ^= v2[c];
    ++index;
  }

  Point current() const {
    return {x1 * 0x1.0p-32, x2 * 0x1.0p-32};
  }
};

}  // namespace

std::vector<Point> sobol2d(std::size_t count, std::size_t skip) {
  std::vector<Point> pts;
  pts.reserve(count);
  Sobol2 gen;  // holds point 0 = (0,0)
  for (std::size_t i = 0; i < skip; ++i) gen.advance();
  for (std::size_t i = 0; i < count; ++i) {
    pts.push_back(gen.current());
    gen.advance();
  }
  return pts;
}

std::vector<Point> generate_interior(Distribution dist, const InteriorShape& shape,
                                     std::uint64_t seed) {
  if (shape.count == 0) throw std::invalid_argument("interior point count must be >= 1");
  switch (dist) {
    case Distribution::Uniform: {
      if (!shape.has_grid()) {
        throw std::invalid_argument("uniform interior points require an nx-by-ny shape");
      }
      std::vector<Point> pts;
      pts.reserve(shape.count);
      for (int j = 1; j <= shape.ny; ++j) {
        for (int i = 1; i <= shape.nx; ++i) {
          pts.push_back({static_cast<double>(i) / (shape.nx + 1),
                         static_cast<double>(j) / (shape.ny + 1)});
        }
      }
      return pts;
    }
    case Distribution::PseudoRandom: {
      NormalSampler rng(mix_seed(seed, 0x706f696e74ULL));
      std::vector<Point> pts;
      pts.reserve(shape.count);
      for (std::size_t i = 0; i < shape.count; ++i) {
        const double x = rng.next_uniform();
        const double y = rng.next_uniform();
        pts.push_back({x, y});
      }
      return pts;
    }
    case Distribution::Sobol:
      return sobol2d(shape.count, 1);  // drop the (0,0) origin term
  }
  throw std::invalid_argument("unknown distribution");
}

std::vector<BoundaryPoint> generate_boundary(std::size_t count, const Problem& problem) {
  if (count < 4) throw std::invalid_argument("boundary needs at least the 4 corners");
  std::vector<BoundaryPoint> pts;
  pts.reserve(count);
  const double step = 4.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = step * static_cast<double>(i);
    Point p;
    if (t < 1.0) {
      p = {t, 0.0};
    } else if (t < 2.0) {
      p = {1.0, t - 1.0};
    } else if (t < 3.0) {
      p = {3.0 - t, 1.0};
    } else {
      p = {0.0, 4.0 - t};
    }
    pts.push_back({p, dirichlet_value(problem, p.x, p.y)});
  }
  return pts;
}

TrainingSet make_training_set(Distribution dist, const InteriorShape& shape,
                              std::size_t boundary_count, const Problem& problem,
                              std::uint64_t seed) {
  TrainingSet set;
  set.distribution = dist;
  set.seed = seed;
  set.interior = generate_interior(dist, shape, seed);
  set.boundary = generate_boundary(boundary_count, problem);
  return set;
}

}  // namespace pinnmg
