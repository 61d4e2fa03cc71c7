#pragma once

#include "pinnmg/grid.hpp"

namespace pinnmg {

/// One lexicographic Gauss-Seidel sweep in place:
///   u_ij <- 1/4 (u_E + u_W + u_N + u_S - h^2 f_ij)
/// reading already-updated west/south neighbours. Boundary nodes are never
/// written.
void gs_sweep(Grid2D& u, const Grid2D& f);

struct GsResult {
  int iterations = 0;
  bool converged = false;
  double last_update_norm = 0.0;  // Euclidean norm of the final sweep's update
};

/// Sweeps until ||u^{n+1} - u^n||_2 <= delta or max_iters. At least one
/// sweep is always performed. On non-convergence the state is retained and
/// converged == false.
GsResult gs_solve(Grid2D& u, const Grid2D& f, double delta, int max_iters);

/// Bilinear prolongation N -> 2N: coincident nodes copied, edge midpoints
/// averaged from 2 neighbours, cell centres from 4 corners.
Grid2D prolongate(const Grid2D& coarse);

/// Matrix-free 5-point operator (4u_C - u_E - u_W - u_N - u_S)/h^2 on the
/// interior with zero Dirichlet closure; boundary entries of the result are 0.
Grid2D apply_stencil(const Grid2D& u);

struct CgResult {
  Grid2D solution;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  std::vector<double> residual_history;  // ||r_k||_2 including the initial residual
  // CG's quadratic objective 1/2<u,Au> - <b,u> per accepted iterate; strictly
  // decreasing in exact arithmetic (the 2-norm of the residual is not).
  std::vector<double> energy_history;
};

/// Unpreconditioned conjugate gradient on the 5-point operator solving
/// -lap(u) = -f with Dirichlet data g lifted into the right-hand side.
/// Stops at ||r_k||_2 / ||r_0||_2 <= rtol.
CgResult cg_solve(const Grid2D& f, const Grid2D& g, double rtol, int max_iters);

}  // namespace pinnmg
