#include "pinnmg/classic.hpp"

#include <cmath>
#include <stdexcept>

#include "pinnmg/common.hpp"

namespace pinnmg {

namespace {

void check_same_shape(const Grid2D& a, const Grid2D& b, const char* what) {
  if (a.n != b.n) {
    throw std::invalid_argument(std::string(what) + ": grid labels differ (" +
                                std::to_string(a.n) + " vs " + std::to_string(b.n) + ")");
  }
}

}  // namespace

void gs_sweep(Grid2D& u, const Grid2D& f) {
  check_same_shape(u, f, "gs_sweep");
  const int n = u.n;
  const double h2 = u.h() * u.h();
  const int stride = n + 1;
  double* v = u.values.data();
  const double* src = f.values.data();
  for (int iy = 1; iy < n; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * stride;
    for (int ix = 1; ix < n; ++ix) {
      const std::size_t c = row + ix;
      v[c] = 0.25 * (v[c + 1] + v[c - 1] + v[c + stride] + v[c - stride] - h2 * src[c]);
    }
  }
}

GsResult gs_solve(Grid2D& u, const Grid2D& f, double delta, int max_iters) {
  check_same_shape(u, f, "gs_solve");
  if (delta <= 0.0) throw std::invalid_argument("gs_solve: delta must be positive");
  GsResult result;
  Grid2D prev = u;
  for (int it = 1; it <= max_iters; ++it) {
    gs_sweep(u, f);
    double ssq = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      const double d = u.values[i] - prev.values[i];
      ssq += d * d;
    }
    result.iterations = it;
    result.last_update_norm = std::sqrt(ssq);
    if (result.last_update_norm <= delta) {
      result.converged = true;
      return result;
    }
    prev.values = u.values;
  }
  return result;
}

Grid2D prolongate(const Grid2D& coarse) {
  const int n = coarse.n;
  Grid2D fine(2 * n);
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      fine.at(2 * ix, 2 * iy) = coarse.at(ix, iy);
    }
  }
  // horizontal edge midpoints
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      fine.at(2 * ix + 1, 2 * iy) = 0.5 * (coarse.at(ix, iy) + coarse.at(ix + 1, iy));
    }
  }
  // vertical edge midpoints
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      fine.at(2 * ix, 2 * iy + 1) = 0.5 * (coarse.at(ix, iy) + coarse.at(ix, iy + 1));
    }
  }
  // cell centres
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      fine.at(2 * ix + 1, 2 * iy + 1) =
          0.25 * (coarse.at(ix, iy) + coarse.at(ix + 1, iy) + coarse.at(ix, iy + 1) +
                  coarse.at(ix + 1, iy + 1));
    }
  }
  return fine;
}

Grid2D apply_stencil(const Grid2D& u) {
  const int n = u.n;
  Grid2D out(n);
  const double inv_h2 = 1.0 / (u.h() * u.h());
  for (int iy = 1; iy < n; ++iy) {
    for (int ix = 1; ix < n; ++ix) {
      out.at(ix, iy) = (4.0 * u.at(ix, iy) - u.at(ix + 1, iy) - u.at(ix - 1, iy) -
                        u.at(ix, iy + 1) - u.at(ix, iy - 1)) *
                       inv_h2;
    }
  }
  return out;
}

namespace {

double interior_dot(const Grid2D& a, const Grid2D& b) {
  double s = 0.0;
  for (int iy = 1; iy < a.n; ++iy) {
    for (int ix = 1; ix < a.n; ++ix) s += a.at(ix, iy) * b.at(ix, iy);
  }
  return s;
}

// Stencil applied to interior unknowns only: Dirichlet nodes are treated as
// zero, their data lives in the right-hand side.
Grid2D apply_operator_homogeneous(const Grid2D& u) {
  Grid2D out(u.n);
  const int n = u.n;
  const double inv_h2 = 1.0 / (u.h() * u.h());
  auto val = [&](int ix, int iy) { return u.is_boundary(ix, iy) ? 0.0 : u.at(ix, iy); };
  for (int iy = 1; iy < n; ++iy) {
    for (int ix = 1; ix < n; ++ix) {
      out.at(ix, iy) = (4.0 * val(ix, iy) - val(ix + 1, iy) - val(ix - 1, iy) -
                        val(ix, iy + 1) - val(ix, iy - 1)) *
                       inv_h2;
    }
  }
  return out;
}

}  // namespace

CgResult cg_solve(const Grid2D& f, const Grid2D& g, double rtol, int max_iters) {
  check_same_shape(f, g, "cg_solve");
  if (rtol <= 0.0) throw std::invalid_argument("cg_solve: rtol must be positive");
  const int n = f.n;
  const double inv_h2 = 1.0 / (f.h() * f.h());

  CgResult result;
  result.solution = Grid2D(n);
  Grid2D& u = result.solution;
  // impose Dirichlet data on the boundary of the solution grid
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      if (u.is_boundary(ix, iy)) u.at(ix, iy) = g.at(ix, iy);
    }
  }

  // b = -f + boundary lifting of -lap
  Grid2D b(n);
  for (int iy = 1; iy < n; ++iy) {
    for (int ix = 1; ix < n; ++ix) {
      double lift = 0.0;
      if (ix == 1) lift += g.at(0, iy);
      if (ix == n - 1) lift += g.at(n, iy);
      if (iy == 1) lift += g.at(ix, 0);
      if (iy == n - 1) lift += g.at(ix, n);
      b.at(ix, iy) = -f.at(ix, iy) + lift * inv_h2;
    }
  }

  Grid2D r = b;  // initial residual with u_interior = 0
  Grid2D p = r;
  Grid2D interior_u(n);  // homogeneous part of the iterate, for the energy value
  double rho = interior_dot(r, r);
  const double r0_norm = std::sqrt(rho);
  if (r0_norm == 0.0) {
    result.converged = true;
    return result;
  }
  result.residual_history.push_back(r0_norm);
  result.energy_history.push_back(0.0);
  const double stop = rtol * r0_norm;
  for (int it = 1; it <= max_iters; ++it) {
    const Grid2D ap = apply_operator_homogeneous(p);
    const double denom = interior_dot(p, ap);
    if (denom <= 0.0) break;  // loss of positive-definiteness: bail out
    const double alpha = rho / denom;
    for (int iy = 1; iy < n; ++iy) {
      for (int ix = 1; ix < n; ++ix) {
        u.at(ix, iy) += alpha * p.at(ix, iy);
        r.at(ix, iy) -= alpha * ap.at(ix, iy);
      }
    }
    for (int iy = 1; iy < n; ++iy) {
      for (int ix = 1; ix < n; ++ix) interior_u.at(ix, iy) += alpha * p.at(ix, iy);
    }
    const double rho_next = interior_dot(r, r);
    result.iterations = it;
    result.relative_residual = std::sqrt(rho_next) / r0_norm;
    result.residual_history.push_back(std::sqrt(rho_next));
    result.energy_history.push_back(
        0.5 * interior_dot(interior_u, apply_operator_homogeneous(interior_u)) -
        interior_dot(b, interior_u));
    if (std::sqrt(rho_next) <= stop) {
      result.converged = true;
      return result;
    }
    const double beta = rho_next / rho;
    rho = rho_next;
    for (int iy = 1; iy < n; ++iy) {
      for (int ix = 1; ix < n; ++ix) {
        p.at(ix, iy) = r.at(ix, iy) + beta * p.at(ix, iy);
      }
    }
  }
  return result;
}

}  // namespace pinnmg
