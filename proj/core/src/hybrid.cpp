#include "pinnmg/hybrid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "pinnmg/sampling.hpp"

namespace pinnmg {

void HybridConfig::validate() const {
  if (coarse_n < 2) throw std::invalid_argument("hybrid: coarse grid label must be >= 2");
  if (fine_n < coarse_n) throw std::invalid_argument("hybrid: fine grid must be >= coarse");
  int n = coarse_n;
  while (n < fine_n) n *= 2;
  if (n != fine_n) {
    throw std::invalid_argument("hybrid: fine/coarse ratio must be a power of two");
  }
  if (ftol < 0.0) throw std::invalid_argument("hybrid: ftol must be >= 0");
  if (delta <= 0.0) throw std::invalid_argument("hybrid: delta must be > 0");
  if (adam_epochs < 0 || lbfgs_cap < 0) {
    throw std::invalid_argument("hybrid: epoch budgets must be >= 0");
  }
  if (sweeps_per_level < 1) throw std::invalid_argument("hybrid: sweeps per level must be >= 1");
}

Grid2D infer_on_grid(const Parameters& params, const NetworkConfig& config, int n,
                     const Problem& problem, Precision eval_precision) {
  NetworkConfig eval_config = config;
  eval_config.precision = eval_precision;
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  const double h = 1.0 / n;
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) nodes.push_back({ix * h, iy * h});
  }
  const std::vector<double> values = forward(params, eval_config, nodes);
  Grid2D grid(n);
  grid.values = values;
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      if (grid.is_boundary(ix, iy)) {
        grid.at(ix, iy) = dirichlet_value(problem, ix * h, iy * h);
      }
    }
  }
  return grid;
}

namespace {

void impose_dirichlet(Grid2D& g, const Problem& problem) {
  const double h = g.h();
  for (int iy = 0; iy <= g.n; ++iy) {
    for (int ix = 0; ix <= g.n; ++ix) {
      if (g.is_boundary(ix, iy)) g.at(ix, iy) = dirichlet_value(problem, ix * h, iy * h);
    }
  }
}

// Prolongation ladder with sweeps_per_level Gauss-Seidel sweeps per doubling.
Grid2D vcycle_up(Grid2D grid, const Problem& problem, int fine_n, int sweeps,
                 std::vector<PhaseRecord>& phases) {
  while (grid.n < fine_n) {
    const double t0 = now_ms();
    grid = prolongate(grid);
    impose_dirichlet(grid, problem);
    const Grid2D f = sample_source(problem, grid.n);
    for (int s = 0; s < sweeps; ++s) gs_sweep(grid, f);
    phases.push_back({"vcycle-" + std::to_string(grid.n), sweeps, now_ms() - t0, 0.0});
  }
  return grid;
}

}  // namespace

std::pair<Grid2D, SolverReport> solve_hybrid(const Problem& problem, const HybridConfig& cfg,
                                             const TrainingSet& set) {
  cfg.validate();
  SolverReport report;
  report.sweeps_per_level = cfg.sweeps_per_level;

  // (1) network structure and weights come from the checkpoint
  double t0 = now_ms();
  const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
  NetworkConfig net_config = ckpt.config;
  net_config.precision = cfg.training_precision;
  report.network = net_config;

  ResidualEvaluator eval(net_config, set, problem, cfg.boundary_weight);
  const double init_loss = eval.loss(ckpt.params).total;
  report.phases.push_back({"init", 0, now_ms() - t0, init_loss});

  // (2) short Adam warm-up, (3) L-BFGS to ftol. A divergent run is retried
  // once from a fresh Xavier init, then aborted.
  TrainSchedule schedule;
  schedule.adam_epochs = cfg.adam_epochs;
  schedule.lbfgs_max_epochs = cfg.lbfgs_cap;
  schedule.ftol = cfg.ftol;
  schedule.boundary_weight = cfg.boundary_weight;

  Parameters params = ckpt.params;
  for (int attempt = 0;; ++attempt) {
    t0 = now_ms();
    TrainReport train;
    train.history.push_back({0, TrainPhase::Init, init_loss, 0.0});
    auto adam = adam_run(params, net_config, set, problem, schedule.adam_epochs,
                         schedule.adam_learning_rate, 0);
    bool diverged = adam.stop_reason == StopReason::NonFiniteLoss;
    double adam_ms = now_ms() - t0;
    LbfgsResult lbfgs;
    if (!diverged) {
      t0 = now_ms();
      lbfgs = lbfgs_run(adam.params, net_config, set, problem, schedule);
      diverged = lbfgs.stop_reason == StopReason::NonFiniteLoss;
    }
    if (!diverged) {
      report.adam_epochs = static_cast<int>(adam.history.size());
      report.lbfgs_epochs = lbfgs.epochs_run;
      report.lbfgs_stop = lbfgs.stop_reason;
      report.final_loss = lbfgs.final_loss;
      report.phases.push_back({"adam", report.adam_epochs, adam_ms,
                               adam.history.empty() ? init_loss : adam.history.back().loss});
      report.phases.push_back({"lbfgs", report.lbfgs_epochs, now_ms() - t0, lbfgs.final_loss});
      report.trained_params = std::move(lbfgs.params);
      break;
    }
    if (attempt >= 1) {
      throw std::runtime_error("hybrid: training diverged twice (non-finite loss)");
    }
    params = xavier_init(net_config, 0xfa11bacc);
  }

  // (5) coarse-grid inference in training precision, widened to 64-bit
  t0 = now_ms();
  Grid2D grid = infer_on_grid(report.trained_params, net_config, cfg.coarse_n, problem,
                              cfg.training_precision);
  report.phases.push_back({"infer", 0, now_ms() - t0, report.final_loss});

  // (6) Gauss-Seidel refinement on the coarse grid, then the upward ladder
  t0 = now_ms();
  const Grid2D f_coarse = sample_source(problem, cfg.coarse_n);
  const GsResult gs = gs_solve(grid, f_coarse, cfg.delta, cfg.gs_max_iters);
  report.coarse_gs_iterations = gs.iterations;
  report.phases.push_back({"gs-coarse", gs.iterations, now_ms() - t0, gs.last_update_norm});

  grid = vcycle_up(std::move(grid), problem, cfg.fine_n, cfg.sweeps_per_level, report.phases);

  if (problem.has_exact()) report.error = error_metrics(grid, problem);
  return {std::move(grid), std::move(report)};
}

std::pair<Grid2D, SolverReport> solve_multigrid_gs(const Problem& problem, int coarse_n,
                                                   int fine_n, double delta,
                                                   int sweeps_per_level, int gs_max_iters) {
  SolverReport report;
  report.sweeps_per_level = sweeps_per_level;
  Grid2D grid(coarse_n);
  impose_dirichlet(grid, problem);
  double t0 = now_ms();
  const Grid2D f_coarse = sample_source(problem, coarse_n);
  const GsResult gs = gs_solve(grid, f_coarse, delta, gs_max_iters);
  report.coarse_gs_iterations = gs.iterations;
  report.phases.push_back({"gs-coarse", gs.iterations, now_ms() - t0, gs.last_update_norm});
  grid = vcycle_up(std::move(grid), problem, fine_n, sweeps_per_level, report.phases);
  if (problem.has_exact()) report.error = error_metrics(grid, problem);
  return {std::move(grid), std::move(report)};
}

void write_report_csv(const SolverReport& report, const std::filesystem::path& path,
                      std::string_view provenance) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open report for writing: " + path.string());
  if (!provenance.empty()) os << "# " << provenance << "\n";
  os << "phase,epochs_or_iters,wall_ms,loss_or_residual\n";
  char buf[32];
  for (const auto& ph : report.phases) {
    std::snprintf(buf, sizeof(buf), "%.17g", ph.loss_or_residual);
    os << ph.phase << "," << ph.epochs_or_iters << "," << static_cast<long long>(ph.wall_ms)
       << "," << buf << "\n";
  }
  if (!os) throw std::runtime_error("report write failed: " + path.string());
}

void write_report_jsonl(const SolverReport& report, const std::filesystem::path& path,
                        std::string_view provenance) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open report for writing: " + path.string());
  for (const auto& ph : report.phases) {
    nlohmann::json line{{"phase", ph.phase},
                        {"epochs_or_iters", ph.epochs_or_iters},
                        {"wall_ms", ph.wall_ms},
                        {"loss_or_residual", ph.loss_or_residual}};
    if (!provenance.empty()) line["provenance"] = provenance;
    os << line.dump() << "\n";
  }
  if (!os) throw std::runtime_error("report write failed: " + path.string());
}

}  // namespace pinnmg
