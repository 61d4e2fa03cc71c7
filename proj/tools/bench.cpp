#include "bench.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace pinnmg::cli {

namespace fs = std::filesystem;

BenchTier BenchTier::desk() {
  BenchTier t;
  t.name = "desk";
  t.interior = "64x64";
  t.boundary = 2000;
  t.adam_epochs = 100;
  t.lbfgs_epochs = 250;
  t.small_interior = "1200";
  t.small_boundary = 200;
  t.large_interior = "128x128";
  t.large_boundary = 4000;
  t.hybrid_coarse = 64;
  t.hybrid_fine = 256;
  t.timing_reps = 3;
  return t;
}

BenchTier BenchTier::paper() {
  BenchTier t;
  t.name = "paper";
  t.interior = "128x128";
  t.boundary = 4000;
  t.adam_epochs = 2000;
  t.lbfgs_epochs = 5000;
  t.small_interior = "1200";
  t.small_boundary = 200;
  t.large_interior = "128x128";
  t.large_boundary = 4000;
  t.hybrid_coarse = 64;
  t.hybrid_fine = 512;
  t.timing_reps = 5;
  return t;
}

BenchTier BenchTier::from_name(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw std::invalid_argument("unknown tier '" + name + "' (expected desk or paper)");
}

const std::vector<std::string>& bench_presets() {
  static const std::vector<std::string> presets = {
      "depth-sweep",   "width-pyramids", "activation-sweep", "dataset-sweep",
      "restart",       "transfer",       "hybrid-vs-classic"};
  return presets;
}

namespace {

RunConfig base_train(const BenchTier& tier) {
  RunConfig r;
  r.subcommand = "train";
  r.precision = Precision::Float32;
  r.distribution = Distribution::Sobol;
  r.interior = tier.interior;
  r.boundary = tier.boundary;
  r.adam_epochs = tier.adam_epochs;
  r.lbfgs_epochs = tier.lbfgs_epochs;
  r.infer_grid = 128;
  return r;
}

std::vector<BenchJob> depth_sweep(const BenchTier& tier) {
  std::vector<BenchJob> jobs;
  for (int depth = 1; depth <= 6; ++depth) {
    BenchJob j;
    j.config_id = std::to_string(depth) + "h50";
    j.run = base_train(tier);
    j.run.hidden.assign(depth, 50);
    jobs.push_back(std::move(j));
  }
  BenchJob wide;  // one wide layer: depth beats breadth
  wide.config_id = "1h640";
  wide.run = base_train(tier);
  wide.run.hidden = {640};
  jobs.push_back(std::move(wide));
  return jobs;
}

std::vector<BenchJob> width_pyramids(const BenchTier& tier) {
  std::vector<BenchJob> jobs;
  const std::vector<std::pair<std::string, std::vector<int>>> shapes = {
      {"ascending", {10, 20, 40, 80, 160, 320}},
      {"descending", {320, 160, 80, 40, 20, 10}},
      {"6h50", {50, 50, 50, 50, 50, 50}},
  };
  for (const auto& [id, widths] : shapes) {
    BenchJob j;
    j.config_id = id;
    j.run = base_train(tier);
    j.run.hidden = widths;
    jobs.push_back(std::move(j));
  }
  return jobs;
}

std::vector<BenchJob> activation_sweep(const BenchTier& tier) {
  std::vector<BenchJob> jobs;
  struct Entry {
    std::string id;
    ActivationKind kind;
    int factor;
  };
  const std::vector<Entry> entries = {
      {"tanh", ActivationKind::Tanh, 0},
      {"swish", ActivationKind::Swish, 0},
      {"sigmoid", ActivationKind::Sigmoid, 0},
      {"sine", ActivationKind::Sine, 0},
      {"laaf5-tanh", ActivationKind::LaafTanh, 5},
      {"laaf10-tanh", ActivationKind::LaafTanh, 10},
      {"laaf5-swish", ActivationKind::LaafSwish, 5},
      {"laaf10-swish", ActivationKind::LaafSwish, 10},
      {"laaf5-sigmoid", ActivationKind::LaafSigmoid, 5},
      {"laaf10-sigmoid", ActivationKind::LaafSigmoid, 10},
  };
  for (ProblemId problem : {ProblemId::FourSines, ProblemId::Disk}) {
    for (const auto& e : entries) {
      BenchJob j;
      j.config_id = std::string(to_string(problem)) + "-" + e.id;
      j.run = base_train(tier);
      j.run.problem = problem;
      j.run.activation = e.kind;
      j.run.laaf_factor = e.factor;
      if (problem == ProblemId::Disk) j.run.infer_grid = 0;  // no analytic solution
      jobs.push_back(std::move(j));
    }
  }
  return jobs;
}

std::vector<BenchJob> dataset_sweep(const BenchTier& tier) {
  std::vector<BenchJob> jobs;
  struct Size {
    std::string id;
    std::string interior;
    std::string uniform_interior;  // uniform needs a tensor shape
    std::size_t boundary;
  };
  const std::vector<Size> sizes = {
      {"small", tier.small_interior, "35x35", tier.small_boundary},
      {"medium", "64x64", "64x64", 2000},
      {"large", tier.large_interior, tier.large_interior, tier.large_boundary},
  };
  for (const auto& size : sizes) {
    for (Distribution dist :
         {Distribution::Uniform, Distribution::PseudoRandom, Distribution::Sobol}) {
      BenchJob j;
      j.config_id = size.id + "-" + std::string(to_string(dist));
      j.run = base_train(tier);
      j.run.problem = ProblemId::Disk;  // the non-smooth study case
      j.run.infer_grid = 0;
      j.run.distribution = dist;
      j.run.interior = dist == Distribution::Uniform ? size.uniform_interior : size.interior;
      j.run.boundary = size.boundary;
      jobs.push_back(std::move(j));
    }
  }
  return jobs;
}

std::vector<BenchJob> restart_preset(const BenchTier& tier) {
  // Train on a small dataset first, then re-train the same network on the
  // full dataset from the saved weights.
  std::vector<BenchJob> jobs;
  BenchJob small;
  small.config_id = "restart-small";
  small.run = base_train(tier);
  small.run.problem = ProblemId::Disk;
  small.run.infer_grid = 0;
  small.run.interior = tier.small_interior;
  small.run.boundary = tier.small_boundary;
  jobs.push_back(small);

  BenchJob large;
  large.config_id = "restart-large";
  large.run = base_train(tier);
  large.run.problem = ProblemId::Disk;
  large.run.infer_grid = 0;
  large.run.adam_epochs = 10;
  large.chain_from = "restart-small";
  jobs.push_back(large);

  BenchJob fresh;  // reference: the large dataset from a fresh init
  fresh.config_id = "restart-reference";
  fresh.run = base_train(tier);
  fresh.run.problem = ProblemId::Disk;
  fresh.run.infer_grid = 0;
  jobs.push_back(fresh);
  return jobs;
}

std::vector<BenchJob> transfer_preset(const BenchTier& tier, const std::string& ckpt) {
  std::vector<BenchJob> jobs;
  BenchJob xavier;
  xavier.config_id = "polytrig-xavier";
  xavier.run = base_train(tier);
  xavier.run.problem = ProblemId::PolyTrig;
  xavier.run.infer_grid = 0;
  xavier.run.activation = ActivationKind::LaafTanh;
  xavier.run.laaf_factor = 5;
  jobs.push_back(xavier);

  BenchJob pre = xavier;
  pre.config_id = "polytrig-pretrained";
  pre.run.init_checkpoint = ckpt;
  pre.run.adam_epochs = 10;
  jobs.push_back(pre);
  return jobs;
}

std::vector<BenchJob> hybrid_vs_classic(const BenchTier& tier, const std::string& ckpt) {
  std::vector<BenchJob> jobs;
  BenchJob hybrid;
  hybrid.kind = BenchJob::Kind::Hybrid;
  hybrid.config_id = "hybrid";
  hybrid.run = base_train(tier);
  hybrid.run.subcommand = "hybrid";
  hybrid.run.interior = "100x100";
  hybrid.run.boundary = 2000;
  hybrid.run.init_checkpoint = ckpt;
  hybrid.run.coarse_n = tier.hybrid_coarse;
  hybrid.run.fine_n = tier.hybrid_fine;
  hybrid.run.ftol = 1e-4;
  hybrid.run.delta = 1e-6;
  hybrid.run.adam_epochs = 10;
  hybrid.run.activation = ActivationKind::LaafTanh;
  hybrid.run.laaf_factor = 5;
  jobs.push_back(hybrid);

  BenchJob mg;
  mg.kind = BenchJob::Kind::MultigridGs;
  mg.config_id = "multigrid-gs";
  mg.run.subcommand = "gs";
  mg.run.coarse_n = tier.hybrid_coarse;
  mg.run.fine_n = tier.hybrid_fine;
  mg.run.delta = 1e-6;
  jobs.push_back(mg);

  for (double rtol : {1e-6, 1e-10, 1e-12}) {
    BenchJob cg;
    cg.kind = BenchJob::Kind::Cg;
    cg.config_id = "cg-rtol" + std::to_string(static_cast<int>(-std::log10(rtol)));
    cg.run.subcommand = "cg";
    cg.run.grid_n = tier.hybrid_fine;
    cg.run.rtol = rtol;
    cg.run.max_iters = 100000;
    jobs.push_back(cg);
  }
  return jobs;
}

struct SummaryRow {
  std::string config_id;
  double final_loss = std::nan("");
  double linf = std::nan("");
  double l2 = std::nan("");
  long long epochs = 0;
  long long iters = 0;
  double wall_ms = 0.0;
};

void write_summary(const std::vector<SummaryRow>& rows, const fs::path& path,
                   const std::string& provenance) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write summary: " + path.string());
  os << "# " << provenance << "\n";
  os << "config_id,final_loss,linf,l2,epochs,iters,wall_ms\n";
  char buf[64];
  auto num = [&](double v) {
    if (std::isnan(v)) return std::string();
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << r.config_id << "," << num(r.final_loss) << "," << num(r.linf) << "," << num(r.l2)
       << "," << r.epochs << "," << r.iters << "," << static_cast<long long>(r.wall_ms)
       << "\n";
  }
}

}  // namespace

std::vector<BenchJob> enumerate_bench(const std::string& preset, const BenchTier& tier,
                                      const std::string& checkpoint_path) {
  if (preset == "depth-sweep") return depth_sweep(tier);
  if (preset == "width-pyramids") return width_pyramids(tier);
  if (preset == "activation-sweep") return activation_sweep(tier);
  if (preset == "dataset-sweep") return dataset_sweep(tier);
  if (preset == "restart") return restart_preset(tier);
  if (preset == "transfer") return transfer_preset(tier, checkpoint_path);
  if (preset == "hybrid-vs-classic") return hybrid_vs_classic(tier, checkpoint_path);
  throw std::invalid_argument("unknown preset '" + preset + "'");
}

int run_bench(const std::string& preset, const BenchTier& tier, const std::string& out_dir,
              const std::string& checkpoint_path, bool dry_run, std::ostream& log) {
  auto jobs = enumerate_bench(preset, tier, checkpoint_path);
  const fs::path root(out_dir);
  if (dry_run) {
    for (const auto& job : jobs) {
      log << job.config_id << ": " << job.run.provenance();
      if (!job.chain_from.empty()) log << " chain_from=" << job.chain_from;
      log << "\n";
    }
    return 0;
  }
  fs::create_directories(root);
  std::vector<SummaryRow> rows;
  for (auto& job : jobs) {
    const fs::path job_dir = root / job.config_id;
    fs::create_directories(job_dir);
    log << "[bench " << preset << "] " << job.config_id << "...\n" << std::flush;
    SummaryRow row;
    row.config_id = job.config_id;
    const double t0 = now_ms();
    switch (job.kind) {
      case BenchJob::Kind::Train: {
        if (!job.chain_from.empty()) {
          job.run.init_checkpoint = (root / job.chain_from / "model.ckpt").string();
        }
        job.run.validate();
        const Problem problem = job.run.make_problem_instance();
        const NetworkConfig net = job.run.make_network();
        const TrainingSet set =
            make_training_set(job.run.distribution, job.run.interior_shape(),
                              job.run.boundary, problem, job.run.data_seed);
        const InitSpec init = job.run.init_checkpoint.empty()
                                  ? InitSpec::xavier(job.run.seed)
                                  : InitSpec::checkpoint(job.run.init_checkpoint);
        const TrainReport report =
            train_pinn(net, init, set, problem, job.run.make_schedule());
        write_loss_history_csv(report, job_dir / "loss_history.csv",
                               job.run.provenance());
        save_checkpoint(net, report.final_params, job.run.provenance(),
                        job_dir / "model.ckpt");
        row.final_loss = report.final_loss;
        row.epochs = report.adam_epochs_run + report.lbfgs_epochs_run;
        if (job.run.infer_grid > 0 && problem.has_exact()) {
          const Grid2D grid = infer_on_grid(report.final_params, net, job.run.infer_grid,
                                            problem, net.precision);
          const auto err = error_metrics(grid, problem);
          row.linf = err.linf;
          row.l2 = err.l2;
        }
        break;
      }
      case BenchJob::Kind::Hybrid: {
        const Problem problem = job.run.make_problem_instance();
        HybridConfig cfg;
        cfg.coarse_n = job.run.coarse_n;
        cfg.fine_n = job.run.fine_n;
        cfg.checkpoint = job.run.init_checkpoint;
        cfg.ftol = job.run.ftol;
        cfg.delta = job.run.delta;
        cfg.adam_epochs = job.run.adam_epochs;
        cfg.lbfgs_cap = job.run.lbfgs_cap;
        const TrainingSet set =
            make_training_set(job.run.distribution, job.run.interior_shape(),
                              job.run.boundary, problem, job.run.data_seed);
        double wall = 0.0;
        for (int rep = 0; rep < tier.timing_reps; ++rep) {
          const double r0 = now_ms();
          auto [grid, report] = solve_hybrid(problem, cfg, set);
          wall += now_ms() - r0;
          if (rep == 0) {
            write_report_csv(report, job_dir / "report.csv", job.run.provenance());
            write_report_jsonl(report, job_dir / "report.jsonl", job.run.provenance());
            write_grid_csv(grid, job_dir / "solution.csv", job.run.provenance());
            row.final_loss = report.final_loss;
            row.epochs = report.adam_epochs + report.lbfgs_epochs;
            row.iters = report.coarse_gs_iterations;
            if (report.error) {
              row.linf = report.error->linf;
              row.l2 = report.error->l2;
            }
          }
        }
        row.wall_ms = wall / tier.timing_reps;
        break;
      }
      case BenchJob::Kind::MultigridGs: {
        const Problem problem = job.run.make_problem_instance();
        double wall = 0.0;
        for (int rep = 0; rep < tier.timing_reps; ++rep) {
          const double r0 = now_ms();
          auto [grid, report] = solve_multigrid_gs(problem, job.run.coarse_n, job.run.fine_n,
                                                   job.run.delta);
          wall += now_ms() - r0;
          if (rep == 0) {
            write_report_csv(report, job_dir / "report.csv", job.run.provenance());
            row.iters = report.coarse_gs_iterations;
            if (report.error) {
              row.linf = report.error->linf;
              row.l2 = report.error->l2;
            }
          }
        }
        row.wall_ms = wall / tier.timing_reps;
        break;
      }
      case BenchJob::Kind::Cg: {
        const Problem problem = job.run.make_problem_instance();
        const Grid2D f = sample_source(problem, job.run.grid_n);
        const Grid2D g = sample_dirichlet(problem, job.run.grid_n);
        double wall = 0.0;
        for (int rep = 0; rep < tier.timing_reps; ++rep) {
          const double r0 = now_ms();
          const auto result = cg_solve(f, g, job.run.rtol, job.run.max_iters);
          wall += now_ms() - r0;
          if (rep == 0) {
            row.iters = result.iterations;
            if (problem.has_exact()) {
              const auto err = error_metrics(result.solution, problem);
              row.linf = err.linf;
              row.l2 = err.l2;
            }
            write_grid_raw(result.solution, job_dir / "solution.grid");
          }
        }
        row.wall_ms = wall / tier.timing_reps;
        break;
      }
    }
    if (row.wall_ms == 0.0) row.wall_ms = now_ms() - t0;
    rows.push_back(std::move(row));
  }
  write_summary(rows, root / "summary.csv",
                "pinnmg " + std::string(kVersion) + " bench preset=" + preset +
                    " tier=" + tier.name);
  log << "[bench " << preset << "] summary: " << (root / "summary.csv").string() << "\n";
  return 0;
}

}  // namespace pinnmg::cli
