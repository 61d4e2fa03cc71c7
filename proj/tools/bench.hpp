#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace pinnmg::cli {

/// Scale knobs for the bench presets. "paper" replicates the reported run
/// sizes (overnight scale); "desk" shrinks datasets and budgets so the whole
/// preset family finishes on a small CPU in well under an hour.
struct BenchTier {
  std::string name;
  std::string interior;
  std::size_t boundary = 2000;
  int adam_epochs = 100;
  int lbfgs_epochs = 250;
  std::string small_interior;  // dataset-sweep / restart small size
  std::size_t small_boundary = 200;
  std::string large_interior;  // dataset-sweep large size
  std::size_t large_boundary = 4000;
  int hybrid_coarse = 64;
  int hybrid_fine = 256;
  int timing_reps = 3;

  static BenchTier desk();
  static BenchTier paper();
  static BenchTier from_name(const std::string& name);
};

/// One unit of work. kind selects the runner; chain_from names a previous
/// job whose saved checkpoint initializes this one (restart preset).
struct BenchJob {
  enum class Kind { Train, Hybrid, MultigridGs, Cg };
  Kind kind = Kind::Train;
  std::string config_id;
  RunConfig run;
  std::string chain_from;
};

const std::vector<std::string>& bench_presets();

std::vector<BenchJob> enumerate_bench(const std::string& preset, const BenchTier& tier,
                                      const std::string& checkpoint_path);

/// Runs the preset matrix: one output directory and loss-history/report CSV
/// per configuration plus a joined summary.csv. dry_run only prints the
/// plan. Returns a process exit status.
int run_bench(const std::string& preset, const BenchTier& tier, const std::string& out_dir,
              const std::string& checkpoint_path, bool dry_run, std::ostream& log);

}  // namespace pinnmg::cli
