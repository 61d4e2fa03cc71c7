#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bench.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace pinnmg;
using namespace pinnmg::cli;

namespace {

std::string resolve_out(const std::string& flag_value, const std::string& subcommand) {
  if (!flag_value.empty()) return flag_value;
  return (fs::path(default_out_root()) / subcommand).string();
}

void write_train_summary(const fs::path& path, const std::string& provenance,
                         const std::string& config_id, const TrainReport& report,
                         const std::optional<ErrorMetrics>& err) {
  std::ofstream os(path, std::ios::trunc);
  os << "# " << provenance << "\n";
  os << "config_id,final_loss,linf,l2,epochs,iters,wall_ms\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const double wall = report.history.empty() ? 0.0 : report.history.back().wall_ms;
  os << config_id << "," << num(report.final_loss) << "," << (err ? num(err->linf) : "")
     << "," << (err ? num(err->l2) : "") << ","
     << report.adam_epochs_run + report.lbfgs_epochs_run << ",0,"
     << static_cast<long long>(wall) << "\n";
}

void attach_network_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--hidden", run.hidden, "Hidden layer widths (e.g. 50,50,50,50)")
      ->delimiter(',');
  cmd->add_option_function<std::string>(
         "--activation",
         [&run](const std::string& s) { run.activation = activation_from_string(s); },
         "tanh|sigmoid|swish|sine|relu|laaf-tanh|laaf-sigmoid|laaf-swish")
      ->default_str("tanh");
  cmd->add_option("--laaf-factor", run.laaf_factor, "Adaptive activation factor n");
  cmd->add_option_function<std::string>(
         "--precision",
         [&run](const std::string& s) { run.precision = precision_from_string(s); },
         "Training arithmetic: 32 or 64")
      ->default_str("64");
}

void attach_dataset_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option_function<std::string>(
         "--dist",
         [&run](const std::string& s) { run.distribution = distribution_from_string(s); },
         "uniform|pseudo-random|sobol")
      ->default_str("sobol");
  cmd->add_option("--interior", run.interior, "Interior points: count or NXxNY")
      ->capture_default_str();
  cmd->add_option("--boundary", run.boundary, "Boundary point count")->capture_default_str();
  cmd->add_option("--data-seed", run.data_seed, "Dataset seed")->capture_default_str();
}

void attach_problem_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option_function<std::string>(
         "--problem", [&run](const std::string& s) { run.problem = problem_from_string(s); },
         "foursines|disk|disk2|polytrig|pretrain")
      ->default_str("foursines");
  cmd->add_flag_function(
      "--polytrig-sines",
      [&run](std::int64_t) { run.polytrig_literal = false; },
      "Use the sine-product variant of the polytrig source");
}

void attach_schedule_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--seed", run.seed, "Xavier init seed")->capture_default_str();
  cmd->add_option("--adam-epochs", run.adam_epochs)->capture_default_str();
  cmd->add_option("--lr", run.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--lbfgs-epochs", run.lbfgs_epochs)->capture_default_str();
  cmd->add_option("--ftol", run.ftol, "Relative-decrease stop for L-BFGS")
      ->capture_default_str();
  cmd->add_option("--lbfgs-m", run.lbfgs_history)->capture_default_str();
  cmd->add_option("--c1", run.wolfe_c1)->capture_default_str();
  cmd->add_option("--c2", run.wolfe_c2)->capture_default_str();
  cmd->add_option("--gtol", run.gradient_tolerance)->capture_default_str();
  cmd->add_option("--target-loss", run.target_loss, "Stop once loss <= value (0 = off)")
      ->capture_default_str();
  cmd->add_option("--boundary-weight", run.boundary_weight)->capture_default_str();
}

int cmd_train(RunConfig run) {
  run.validate();
  const fs::path out(run.out_dir);
  fs::create_directories(out);
  const Problem problem = run.make_problem_instance();
  const NetworkConfig net = run.make_network();
  const TrainingSet set = make_training_set(run.distribution, run.interior_shape(),
                                            run.boundary, problem, run.data_seed);
  const InitSpec init = run.init_checkpoint.empty() ? InitSpec::xavier(run.seed)
                                                    : InitSpec::checkpoint(run.init_checkpoint);
  std::cout << "training: " << run.provenance() << "\n";
  const TrainReport report = train_pinn(net, init, set, problem, run.make_schedule());
  write_loss_history_csv(report, out / "loss_history.csv", run.provenance());
  save_checkpoint(net, report.final_params, run.provenance(), out / "model.ckpt");
  std::optional<ErrorMetrics> err;
  if (run.infer_grid > 0) {
    const Grid2D grid =
        infer_on_grid(report.final_params, net, run.infer_grid, problem, net.precision);
    write_grid_csv(grid, out / "solution.csv", run.provenance());
    write_grid_raw(grid, out / "solution.grid");
    if (problem.has_exact()) err = error_metrics(grid, problem);
  }
  write_train_summary(out / "summary.csv", run.provenance(), "train", report, err);
  std::cout << "stop: " << to_string(report.stop_reason) << "  final loss "
            << report.final_loss << " after " << report.adam_epochs_run << " adam + "
            << report.lbfgs_epochs_run << " lbfgs epochs\n";
  if (err) std::cout << "errors vs analytic: Linf " << err->linf << "  L2 " << err->l2 << "\n";
  std::cout << "outputs in " << out.string() << "\n";
  return 0;
}

int cmd_hybrid(RunConfig run) {
  const fs::path out(run.out_dir);
  fs::create_directories(out);
  const Problem problem = run.make_problem_instance();
  HybridConfig cfg;
  cfg.coarse_n = run.coarse_n;
  cfg.fine_n = run.fine_n;
  cfg.checkpoint = run.init_checkpoint;
  cfg.ftol = run.ftol;
  cfg.delta = run.delta;
  cfg.adam_epochs = run.adam_epochs;
  cfg.lbfgs_cap = run.lbfgs_cap;
  cfg.training_precision = run.precision;
  cfg.sweeps_per_level = run.sweeps_per_level;
  cfg.boundary_weight = run.boundary_weight;
  cfg.validate();
  const TrainingSet set = make_training_set(run.distribution, run.interior_shape(),
                                            run.boundary, problem, run.data_seed);
  std::cout << "hybrid: " << run.provenance() << "\n";
  auto [grid, report] = solve_hybrid(problem, cfg, set);
  write_grid_csv(grid, out / "solution.csv", run.provenance());
  write_grid_raw(grid, out / "solution.grid");
  write_report_csv(report, out / "report.csv", run.provenance());
  write_report_jsonl(report, out / "report.jsonl", run.provenance());
  save_checkpoint(report.network, report.trained_params, run.provenance(),
                  out / "model.ckpt");
  std::cout << "adam " << report.adam_epochs << " + lbfgs " << report.lbfgs_epochs
            << " epochs (stop: " << to_string(report.lbfgs_stop) << "), coarse GS "
            << report.coarse_gs_iterations << " iterations, final loss " << report.final_loss
            << "\n";
  if (report.error) {
    std::cout << "errors vs analytic: Linf " << report.error->linf << "  L2 "
              << report.error->l2 << "\n";
  }
  std::cout << "outputs in " << out.string() << "\n";
  return 0;
}

int cmd_gs(const RunConfig& run) {
  run.validate();
  const fs::path out(run.out_dir);
  fs::create_directories(out);
  const Problem problem = run.make_problem_instance();
  Grid2D u = sample_dirichlet(problem, run.grid_n);
  const Grid2D f = sample_source(problem, run.grid_n);
  const double t0 = now_ms();
  const GsResult result = gs_solve(u, f, run.delta, run.max_iters);
  const double wall = now_ms() - t0;
  write_grid_csv(u, out / "solution.csv", run.provenance());
  write_grid_raw(u, out / "solution.grid");
  SolverReport report;
  report.coarse_gs_iterations = result.iterations;
  report.phases.push_back({"gs", result.iterations, wall, result.last_update_norm});
  if (problem.has_exact()) report.error = error_metrics(u, problem);
  write_report_csv(report, out / "report.csv", run.provenance());
  std::cout << (result.converged ? "converged" : "NOT converged") << " in "
            << result.iterations << " iterations (update norm " << result.last_update_norm
            << ")\n";
  if (report.error) {
    std::cout << "errors vs analytic: Linf " << report.error->linf << "  L2 "
              << report.error->l2 << "\n";
  }
  std::cout << "outputs in " << out.string() << "\n";
  return result.converged ? 0 : 3;
}

int cmd_cg(const RunConfig& run) {
  run.validate();
  const fs::path out(run.out_dir);
  fs::create_directories(out);
  const Problem problem = run.make_problem_instance();
  const Grid2D f = sample_source(problem, run.grid_n);
  const Grid2D g = sample_dirichlet(problem, run.grid_n);
  const double t0 = now_ms();
  const CgResult result = cg_solve(f, g, run.rtol, run.max_iters);
  const double wall = now_ms() - t0;
  write_grid_csv(result.solution, out / "solution.csv", run.provenance());
  write_grid_raw(result.solution, out / "solution.grid");
  SolverReport report;
  report.phases.push_back({"cg", result.iterations, wall, result.relative_residual});
  if (problem.has_exact()) report.error = error_metrics(result.solution, problem);
  write_report_csv(report, out / "report.csv", run.provenance());
  std::cout << (result.converged ? "converged" : "NOT converged") << " in "
            << result.iterations << " iterations (relative residual "
            << result.relative_residual << ")\n";
  if (report.error) {
    std::cout << "errors vs analytic: Linf " << report.error->linf << "  L2 "
              << report.error->l2 << "\n";
  }
  std::cout << "outputs in " << out.string() << "\n";
  return result.converged ? 0 : 3;
}

int cmd_info(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  std::cout << "checkpoint: " << path << "\n";
  std::cout << "layers: ";
  for (std::size_t i = 0; i < ckpt.config.layer_sizes.size(); ++i) {
    std::cout << (i ? "-" : "") << ckpt.config.layer_sizes[i];
  }
  std::cout << "\nactivation: " << to_string(ckpt.config.activation);
  if (ckpt.config.laaf_factor > 0) std::cout << " (factor " << ckpt.config.laaf_factor << ")";
  std::cout << "\nparameters: " << ckpt.params.size() << "\n";
  std::cout << "provenance: " << (ckpt.provenance.empty() ? "(none)" : ckpt.provenance)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PINN + multigrid Poisson solver workbench"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file; flags override");
  app.get_config_formatter_base()->comment('#');

  RunConfig run;
  std::string out_flag;
  std::string ckpt_flag;

  auto* train = app.add_subcommand("train", "Train a PINN on a Poisson problem");
  attach_problem_flags(train, run);
  attach_network_flags(train, run);
  attach_dataset_flags(train, run);
  attach_schedule_flags(train, run);
  train->add_option("--init-ckpt", run.init_checkpoint,
                    "Initialize from a checkpoint instead of Xavier");
  train->add_option("--infer-grid", run.infer_grid,
                    "Also sample the surrogate on an N-labelled grid");
  train->add_option("--out", out_flag, "Output directory");

  auto* hybrid = app.add_subcommand("hybrid", "Hybrid DL + Gauss-Seidel multigrid solve");
  attach_problem_flags(hybrid, run);
  attach_dataset_flags(hybrid, run);
  hybrid->add_option("--ckpt", ckpt_flag, "Pre-trained network checkpoint")->required();
  hybrid->add_option("--coarse", run.coarse_n, "Coarse grid label")->capture_default_str();
  hybrid->add_option("--fine", run.fine_n, "Fine grid label")->capture_default_str();
  hybrid->add_option("--ftol", run.ftol, "L-BFGS relative-decrease stop")->default_val(1e-4);
  hybrid->add_option("--delta", run.delta, "Gauss-Seidel update-norm stop")
      ->capture_default_str();
  hybrid->add_option("--adam-epochs", run.adam_epochs)->default_val(10);
  hybrid->add_option("--lbfgs-cap", run.lbfgs_cap)->capture_default_str();
  hybrid->add_option_function<std::string>(
            "--precision",
            [&run](const std::string& s) { run.precision = precision_from_string(s); },
            "Training arithmetic: 32 or 64")
      ->default_str("32");
  hybrid->add_option("--sweeps", run.sweeps_per_level, "GS sweeps per prolongation level")
      ->capture_default_str();
  hybrid->add_option("--boundary-weight", run.boundary_weight)->capture_default_str();
  hybrid->add_option("--out", out_flag, "Output directory");

  auto* gs = app.add_subcommand("gs", "Gauss-Seidel solve on a uniform grid");
  attach_problem_flags(gs, run);
  gs->add_option("--n", run.grid_n, "Grid label N (grid has (N+1)^2 nodes)")
      ->capture_default_str();
  gs->add_option("--delta", run.delta, "Update-norm stopping tolerance")->default_val(1e-10);
  gs->add_option("--max-iters", run.max_iters)->capture_default_str();
  gs->add_option("--out", out_flag, "Output directory");

  auto* cg = app.add_subcommand("cg", "Conjugate-gradient solve on a uniform grid");
  attach_problem_flags(cg, run);
  cg->add_option("--n", run.grid_n, "Grid label N")->capture_default_str();
  cg->add_option("--rtol", run.rtol, "Relative residual stop")->capture_default_str();
  cg->add_option("--max-iters", run.max_iters)->default_val(100000);
  cg->add_option("--out", out_flag, "Output directory");

  auto* bench = app.add_subcommand("bench", "Characterization sweep presets");
  std::string preset, tier_name = "desk";
  bool dry_run = false;
  bench->add_option("--preset", preset, "One of the named sweep presets")
      ->required()
      ->check(CLI::IsMember(bench_presets()));
  bench->add_option("--tier", tier_name, "desk|paper")->capture_default_str();
  bench->add_option("--ckpt", ckpt_flag,
                    "Pre-trained checkpoint (transfer / hybrid-vs-classic presets)")
      ->default_val("assets/pretrain.ckpt");
  bench->add_flag("--dry-run", dry_run, "Print the configuration matrix and exit");
  bench->add_option("--out", out_flag, "Output directory");

  auto* info = app.add_subcommand("info", "Describe a checkpoint file");
  std::string info_path;
  info->add_option("path", info_path, "Checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      run.subcommand = "train";
      if (!run.init_checkpoint.empty() && train->count("--adam-epochs") == 0) {
        run.adam_epochs = 10;  // transfer-learning default warm-up
      }
      run.out_dir = resolve_out(out_flag, "train");
      return cmd_train(run);
    }
    if (hybrid->parsed()) {
      run.subcommand = "hybrid";
      run.init_checkpoint = ckpt_flag;
      run.precision = hybrid->count("--precision") ? run.precision : Precision::Float32;
      if (hybrid->count("--interior") == 0) run.interior = "100x100";
      run.out_dir = resolve_out(out_flag, "hybrid");
      return cmd_hybrid(run);
    }
    if (gs->parsed()) {
      run.subcommand = "gs";
      run.out_dir = resolve_out(out_flag, "gs");
      return cmd_gs(run);
    }
    if (cg->parsed()) {
      run.subcommand = "cg";
      run.out_dir = resolve_out(out_flag, "cg");
      return cmd_cg(run);
    }
    if (bench->parsed()) {
      const BenchTier tier = BenchTier::from_name(tier_name);
      const std::string out = resolve_out(out_flag, "bench-" + preset + "-" + tier.name);
      return run_bench(preset, tier, out, ckpt_flag, dry_run, std::cout);
    }
    if (info->parsed()) return cmd_info(info_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
