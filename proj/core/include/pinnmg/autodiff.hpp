#pragma once

#include <memory>
#include <span>

#include "pinnmg/net.hpp"
#include "pinnmg/problems.hpp"
#include "pinnmg/sampling.hpp"

namespace pinnmg {

struct LossBreakdown {
  double total = 0.0;
  double interior_mse = 0.0;
  double boundary_mse = 0.0;
  double boundary_weight = 1.0;
  std::size_t n_interior = 0;
  std::size_t n_boundary = 0;
};

struct ValueAndLaplacian {
  double value = 0.0;
  double laplacian = 0.0;
};

/// Network value and Laplacian at one point via second-order forward-mode
/// propagation (jets carry v, dv/dx, dv/dy, d2v/dx2, d2v/dy2; the cross term
/// is not needed for the Laplacian and is not carried). Throws for
/// non-smooth activations.
ValueAndLaplacian forward_laplacian(const Parameters& params, const NetworkConfig& config,
                                    Point point);

/// interior MSE of (lap(u) - f) plus boundary_weight times boundary MSE of
/// (u - g). Per-point terms are reduced in a canonical sorted pairwise
/// order, so the value is permutation-invariant and thread-count-invariant.
LossBreakdown residual_loss(const Parameters& params, const NetworkConfig& config,
                            const TrainingSet& set, const Problem& problem,
                            double boundary_weight = 1.0);

/// Loss plus its exact gradient with respect to every parameter entry
/// (including LAAF slopes), by reverse accumulation through the jet forward
/// pass. grad.size() must equal params.size().
LossBreakdown loss_gradient(const Parameters& params, const NetworkConfig& config,
                            const TrainingSet& set, const Problem& problem,
                            std::span<double> grad, double boundary_weight = 1.0);

/// Central-difference oracle (always 64-bit): worst relative deviation of
/// loss_gradient against finite differences with per-entry step h*(1+|p_i|),
/// denominator max(|g_i|, 1e-8).
double fd_check(const Parameters& params, const NetworkConfig& config, const TrainingSet& set,
                const Problem& problem, double h, double boundary_weight = 1.0);

/// Persistent evaluator: owns the point blocks, precomputed source/boundary
/// data and scratch buffers, so trainers can evaluate repeatedly without
/// re-allocating. Semantics identical to the free functions above.
class ResidualEvaluator {
 public:
  ResidualEvaluator(const NetworkConfig& config, const TrainingSet& set, const Problem& problem,
                    double boundary_weight = 1.0);
  ~ResidualEvaluator();
  ResidualEvaluator(ResidualEvaluator&&) noexcept;
  ResidualEvaluator& operator=(ResidualEvaluator&&) noexcept;

  LossBreakdown loss(const Parameters& params) const;
  LossBreakdown loss_gradient(const Parameters& params, std::span<double> grad) const;

  std::size_t parameter_count() const;
  const NetworkConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pinnmg
