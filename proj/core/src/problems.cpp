#include "pinnmg/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pinnmg {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* to_string(ProblemId id) {
  switch (id) {
    case ProblemId::FourSines: return "foursines";
    case ProblemId::Disk: return "disk";
    case ProblemId::Disk2: return "disk2";
    case ProblemId::PolyTrig: return "polytrig";
    case ProblemId::Pretrain: return "pretrain";
  }
  return "?";
}

ProblemId problem_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ProblemId::Pretrain); ++i) {
    const auto id = static_cast<ProblemId>(i);
    if (s == to_string(id)) return id;
  }
  throw std::invalid_argument("unknown problem: " + std::string(s));
}

Problem make_problem(ProblemId id) { return Problem{id}; }

double eval_source(const Problem& p, double x, double y) {
  switch (p.id) {
    case ProblemId::FourSines: {
      double sum = 0.0;
      for (int k = 1; k <= 4; ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        sum += sign * 2.0 * k * std::sin(k * kPi * x) * std::sin(k * kPi * y);
      }
      return 0.25 * sum;
    }
    case ProblemId::Disk: {
      const double dx = x - 0.5, dy = y - 0.5;
      return dx * dx + dy * dy <= 0.2 * 0.2 ? 1.0 : 0.0;  // closed disk
    }
    case ProblemId::Disk2: {
      const double dx = x - 0.7, dy = y - 0.7;
      return dx * dx + dy * dy <= 0.1 * 0.1 ? -10.0 : 0.0;
    }
    case ProblemId::PolyTrig: {
      const double poly = 10.0 * (x * (x - 1.0) + y * (y - 1.0));
      const double sines = -2.0 * std::sin(kPi * x) * std::sin(kPi * y);
      // Third term as printed, 5*(2*pi*x)*sin(2*pi*y), or the presumed
      // sine-product variant.
      const double third = p.polytrig_literal
                               ? 5.0 * (2.0 * kPi * x) * std::sin(2.0 * kPi * y)
                               : 5.0 * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
      return poly + sines + third;
    }
    case ProblemId::Pretrain:
      return -2.0 * std::sin(kPi * x) * std::sin(kPi * y) -
             72.0 * std::sin(6.0 * kPi * x) * std::sin(6.0 * kPi * y);
  }
  throw std::invalid_argument("unknown problem id");
}

double dirichlet_value(const Problem&, double, double) { return 0.0; }

double exact_solution(const Problem& p, double x, double y) {
  switch (p.id) {
    case ProblemId::FourSines: {
      // lap(sin(k pi x) sin(k pi y)) = -2 k^2 pi^2 * same, so each source
      // mode (-1)^{k+1} k/2 inverts to (-1)^k / (4 k pi^2).
      double sum = 0.0;
      for (int k = 1; k <= 4; ++k) {
        const double sign = (k % 2 == 1) ? -1.0 : 1.0;
        sum += sign / (4.0 * k * kPi * kPi) * std::sin(k * kPi * x) * std::sin(k * kPi * y);
      }
      return sum;
    }
    case ProblemId::Pretrain:
      return (std::sin(kPi * x) * std::sin(kPi * y) +
              std::sin(6.0 * kPi * x) * std::sin(6.0 * kPi * y)) /
             (kPi * kPi);
    default:
      throw std::invalid_argument(std::string("no analytic solution for problem ") +
                                  to_string(p.id));
  }
}

Grid2D sample_source(const Problem& p, int n) {
  Grid2D g(n);
  const double h = g.h();
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) g.at(ix, iy) = eval_source(p, ix * h, iy * h);
  }
  return g;
}

Grid2D sample_exact(const Problem& p, int n) {
  Grid2D g(n);
  const double h = g.h();
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) g.at(ix, iy) = exact_solution(p, ix * h, iy * h);
  }
  return g;
}

Grid2D sample_dirichlet(const Problem& p, int n) {
  Grid2D g(n);
  const double h = g.h();
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      if (g.is_boundary(ix, iy)) g.at(ix, iy) = dirichlet_value(p, ix * h, iy * h);
    }
  }
  return g;
}

ErrorMetrics error_metrics(const Grid2D& grid, const Problem& p) {
  if (!p.has_exact()) {
    throw std::invalid_argument(std::string("error metrics need an analytic solution; ") +
                                to_string(p.id) + " has none");
  }
  const double h = grid.h();
  double linf = 0.0;
  double ssq = 0.0;
  for (int iy = 0; iy <= grid.n; ++iy) {
    for (int ix = 0; ix <= grid.n; ++ix) {
      const double diff = grid.at(ix, iy) - exact_solution(p, ix * h, iy * h);
      linf = std::max(linf, std::abs(diff));
      ssq += diff * diff;
    }
  }
  return {linf, h * std::sqrt(ssq)};
}

double mode_projection(const Grid2D& field, int k) {
  if (k < 1) throw std::invalid_argument("mode index must be >= 1");
  const int n = field.n;
  const double h = field.h();
  double sum = 0.0;
  for (int iy = 1; iy < n; ++iy) {
    const double sy = std::sin(k * kPi * iy * h);
    for (int ix = 1; ix < n; ++ix) {
      sum += field.at(ix, iy) * std::sin(k * kPi * ix * h) * sy;
    }
  }
  return 4.0 * h * h * sum;
}

}  // namespace pinnmg
