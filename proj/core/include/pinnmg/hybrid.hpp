#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pinnmg/classic.hpp"
#include "pinnmg/train.hpp"

namespace pinnmg {

struct HybridConfig {
  int coarse_n = 64;
  int fine_n = 512;  // must be coarse_n * 2^k
  std::filesystem::path checkpoint;
  double ftol = 1e-4;
  double delta = 1e-6;
  int adam_epochs = 10;
  int lbfgs_cap = 1000;
  Precision training_precision = Precision::Float32;
  int sweeps_per_level = 1;
  int gs_max_iters = 2'000'000;
  double boundary_weight = 1.0;

  void validate() const;  // throws std::invalid_argument
};

struct PhaseRecord {
  std::string phase;
  long long epochs_or_iters = 0;
  double wall_ms = 0.0;
  double loss_or_residual = 0.0;
};

struct SolverReport {
  int adam_epochs = 0;
  int lbfgs_epochs = 0;
  int coarse_gs_iterations = 0;
  int sweeps_per_level = 0;
  StopReason lbfgs_stop = StopReason::MaxEpochs;
  double final_loss = 0.0;
  std::vector<PhaseRecord> phases;
  std::optional<ErrorMetrics> error;  // vs analytic solution when available
  Parameters trained_params;          // step-4 surrogate, savable for reuse
  NetworkConfig network;
};

/// Evaluates the surrogate at every node of an N-labelled grid in the given
/// training precision, widens to 64-bit, and overwrites boundary nodes with
/// the exact Dirichlet values.
Grid2D infer_on_grid(const Parameters& params, const NetworkConfig& config, int n,
                     const Problem& problem, Precision eval_precision = Precision::Float32);

/// The six-step pipeline: load checkpoint, short Adam warm-up, L-BFGS to
/// ftol (capped), coarse-grid inference, Gauss-Seidel refinement to delta,
/// then prolongation with sweeps_per_level Gauss-Seidel sweeps per doubling
/// up to fine_n. Dirichlet data is re-imposed after every prolongation.
std::pair<Grid2D, SolverReport> solve_hybrid(const Problem& problem, const HybridConfig& cfg,
                                             const TrainingSet& set);

/// Classic baseline with the same shape: Gauss-Seidel from zero on the
/// coarse grid to delta, then the identical prolongation/sweep ladder.
std::pair<Grid2D, SolverReport> solve_multigrid_gs(const Problem& problem, int coarse_n,
                                                   int fine_n, double delta,
                                                   int sweeps_per_level = 1,
                                                   int gs_max_iters = 2'000'000);

void write_report_csv(const SolverReport& report, const std::filesystem::path& path,
                      std::string_view provenance);
void write_report_jsonl(const SolverReport& report, const std::filesystem::path& path,
                        std::string_view provenance);

}  // namespace pinnmg
