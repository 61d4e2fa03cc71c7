#pragma once

#include <cstdint>
#include <string>

#include "pinnmg/hybrid.hpp"
#include "pinnmg/problems.hpp"
#include "pinnmg/sampling.hpp"
#include "pinnmg/train.hpp"

namespace pinnmg::cli {

/// Everything a run needs, resolved from flags/config file. Fully serialized
/// into every output's provenance header.
struct RunConfig {
  std::string subcommand;

  // problem
  ProblemId problem = ProblemId::FourSines;
  bool polytrig_literal = true;

  // network
  std::vector<int> hidden = {50, 50, 50, 50};
  ActivationKind activation = ActivationKind::Tanh;
  int laaf_factor = 0;
  Precision precision = Precision::Float64;

  // dataset
  Distribution distribution = Distribution::Sobol;
  std::string interior = "64x64";  // "N" or "NXxNY"
  std::size_t boundary = 2000;
  std::uint64_t data_seed = 1;

  // schedule
  std::uint64_t seed = 1;
  std::string init_checkpoint;  // empty = Xavier
  int adam_epochs = 2000;
  double learning_rate = 1e-3;
  int lbfgs_epochs = 5000;
  double ftol = 0.0;
  int lbfgs_history = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  double gradient_tolerance = 1e-9;
  double target_loss = 0.0;  // 0 = disabled
  double boundary_weight = 1.0;

  // solvers
  int grid_n = 64;        // gs/cg grid label
  int coarse_n = 64;      // hybrid
  int fine_n = 512;       // hybrid
  double delta = 1e-6;    // gs / hybrid
  double rtol = 1e-12;    // cg
  int sweeps_per_level = 1;
  int max_iters = 2'000'000;
  int lbfgs_cap = 1000;   // hybrid

  // inference / outputs
  int infer_grid = 0;  // 0 = skip
  std::string out_dir;

  Problem make_problem_instance() const;
  NetworkConfig make_network() const;
  InteriorShape interior_shape() const;
  TrainSchedule make_schedule() const;

  /// One-line "key=value" serialization used as provenance in every output.
  std::string provenance() const;

  /// Throws std::invalid_argument on any violated invariant (before compute).
  void validate() const;
};

/// Default output root: $PINNMG_OUT_ROOT or ./runs.
std::string default_out_root();

InteriorShape parse_interior_shape(const std::string& text);

}  // namespace pinnmg::cli
