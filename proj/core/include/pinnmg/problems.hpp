#pragma once

#include <string_view>

#include "pinnmg/grid.hpp"

namespace pinnmg {

enum class ProblemId { FourSines, Disk, Disk2, PolyTrig, Pretrain };

const char* to_string(ProblemId id);
ProblemId problem_from_string(std::string_view s);

/// A Poisson right-hand side on the unit square with homogeneous Dirichlet
/// data. FourSines and Pretrain carry a closed-form solution.
struct Problem {
  ProblemId id = ProblemId::FourSines;
  /// PolyTrig only: evaluate the source exactly as printed (true) or with
  /// the presumed-intended sine product in the third term (false).
  bool polytrig_literal = true;

  bool has_exact() const {
    return id == ProblemId::FourSines || id == ProblemId::Pretrain;
  }
};

Problem make_problem(ProblemId id);

double eval_source(const Problem& p, double x, double y);
double dirichlet_value(const Problem& p, double x, double y);
double exact_solution(const Problem& p, double x, double y);

/// Source term / exact solution / boundary data sampled on an N-labelled grid.
Grid2D sample_source(const Problem& p, int n);
Grid2D sample_exact(const Problem& p, int n);
Grid2D sample_dirichlet(const Problem& p, int n);  // boundary nodes set, interior zero

struct ErrorMetrics {
  double linf;
  double l2;
};

/// Nodewise comparison against the analytic solution; L2 is the h-scaled
/// discrete norm. Throws if the problem has no exact solution.
ErrorMetrics error_metrics(const Grid2D& grid, const Problem& p);

/// Discrete sine-mode coefficient c_k = 4 h^2 sum_interior u * sin(k pi x) sin(k pi y).
double mode_projection(const Grid2D& field, int k);

}  // namespace pinnmg
