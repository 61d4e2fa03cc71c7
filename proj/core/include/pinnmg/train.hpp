#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "pinnmg/autodiff.hpp"

namespace pinnmg {

struct WolfeParams {
  double c1 = 1e-4;
  double c2 = 0.9;
};

struct TrainSchedule {
  int adam_epochs = 0;
  double adam_learning_rate = 1e-3;
  int lbfgs_max_epochs = 0;
  /// Stop L-BFGS when (r_k - r_{k+1}) / max(|r_k|, |r_{k+1}|, 1) <= ftol.
  double ftol = 0.0;
  int lbfgs_history = 10;
  WolfeParams wolfe;
  double gradient_tolerance = 1e-9;
  /// Optional early exit once the loss reaches this value (harness use).
  std::optional<double> target_loss;
  double boundary_weight = 1.0;
};

enum class StopReason {
  Ftol,
  MaxEpochs,
  GradientTol,
  TargetLoss,
  LineSearchFailure,
  NonFiniteLoss,
};
const char* to_string(StopReason r);

enum class TrainPhase { Init, Adam, Lbfgs };
const char* to_string(TrainPhase p);

struct EpochRecord {
  int epoch = 0;  // strictly increasing across phases; 0 = initial state
  TrainPhase phase = TrainPhase::Init;
  double loss = 0.0;
  double wall_ms = 0.0;  // cumulative within the run
};

struct TrainReport {
  std::vector<EpochRecord> history;
  StopReason stop_reason = StopReason::MaxEpochs;
  Parameters final_params;
  double final_loss = 0.0;
  int adam_epochs_run = 0;
  int lbfgs_epochs_run = 0;
};

/// Observer called after every optimizer epoch (and once for the initial
/// state) with the current parameters.
using EpochCallback =
    std::function<void(int epoch, TrainPhase phase, double loss, const Parameters& params)>;

/// The quasi-Newton relative-decrease stopping rule:
/// (r_k - r_{k+1}) / max(|r_k|, |r_{k+1}|, 1) <= ftol.
bool ftol_stop(double r_k, double r_k1, double ftol);

/// A differentiable objective: returns f(x) and fills grad with its gradient.
using Objective = std::function<double(const Parameters& x, std::span<double> grad)>;

struct AdamResult {
  Parameters params;
  std::vector<EpochRecord> history;
  StopReason stop_reason = StopReason::MaxEpochs;  // MaxEpochs = ran to completion
};

/// Full-batch Adam (beta1=0.9, beta2=0.999, eps=1e-8) on an arbitrary
/// objective; one epoch is one full-batch step.
AdamResult adam_minimize(const Objective& objective, Parameters x0, int epochs,
                         double learning_rate, const EpochCallback& callback = nullptr);

/// Adam on the PINN residual loss. Deterministic given its inputs; `seed`
/// is reserved for stochastic variants and currently unused.
AdamResult adam_run(const Parameters& params, const NetworkConfig& config,
                    const TrainingSet& set, const Problem& problem, int epochs,
                    double learning_rate, std::uint64_t seed,
                    const EpochCallback& callback = nullptr);

struct LbfgsResult {
  Parameters params;
  std::vector<EpochRecord> history;
  StopReason stop_reason = StopReason::MaxEpochs;
  double final_loss = 0.0;
  int epochs_run = 0;
};

/// Two-loop-recursion L-BFGS with a strong-Wolfe line search and the ftol
/// stopping rule, on an arbitrary objective. On line-search failure returns
/// the best iterate seen.
LbfgsResult lbfgs_minimize(const Objective& objective, Parameters x0,
                           const TrainSchedule& schedule,
                           const EpochCallback& callback = nullptr);

/// L-BFGS on the PINN residual loss.
LbfgsResult lbfgs_run(const Parameters& params, const NetworkConfig& config,
                      const TrainingSet& set, const Problem& problem,
                      const TrainSchedule& schedule, const EpochCallback& callback = nullptr);

/// Network initialization: fresh Xavier draw or a checkpoint on disk.
struct InitSpec {
  std::variant<std::uint64_t, std::filesystem::path> source;
  static InitSpec xavier(std::uint64_t seed) { return {seed}; }
  static InitSpec checkpoint(std::filesystem::path path) { return {std::move(path)}; }
  bool is_checkpoint() const { return source.index() == 1; }
};

/// Adam warm-up followed by L-BFGS, per the schedule. Checkpoint inits are
/// shape-checked against `config` before training.
TrainReport train_pinn(const NetworkConfig& config, const InitSpec& init, const TrainingSet& set,
                       const Problem& problem, const TrainSchedule& schedule,
                       const EpochCallback& callback = nullptr);

/// Loss history CSV: provenance comment lines, then epoch,phase,loss,wall_ms.
void write_loss_history_csv(const TrainReport& report, const std::filesystem::path& path,
                            std::string_view provenance);

}  // namespace pinnmg
