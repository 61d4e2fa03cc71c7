#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>

namespace pinnmg {

inline constexpr std::string_view kVersion = "0.1.0";

/// Arithmetic width used for network evaluation and training.
enum class Precision { Float32, Float64 };

const char* to_string(Precision p);
Precision precision_from_string(std::string_view s);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Number of collocation points per reduction block. Fixed: the block
/// partition is part of the numerical contract (results are identical for
/// any thread count because blocks are combined in a fixed tree order).
inline constexpr std::size_t kReductionBlock = 32;

/// Deterministic pairwise (binary tree) sum over `v`, splitting each range
/// at its midpoint. Independent of threading; used for all loss reductions.
double pairwise_sum(std::span<const double> v);

/// Runs fn(block_index, worker_index) for every block in [0, n_blocks),
/// distributing contiguous ranges over worker threads. Each block has a
/// single writer, so results do not depend on the thread count (override
/// with the PINNMG_THREADS environment variable). worker_index <
/// worker_thread_count() and can address per-worker scratch.
void parallel_blocks(std::size_t n_blocks,
                     const std::function<void(std::size_t, std::size_t)>& fn);

std::size_t worker_thread_count();

/// Deterministic, platform-independent N(0,1) stream: raw mt19937_64 draws
/// mapped to (0,1] doubles and fed through Box-Muller. Avoids the
/// implementation-defined std::normal_distribution.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
  double next();

  /// Uniform double in the open interval (0,1).
  double next_uniform();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// SplitMix64 mix, used to derive independent per-layer seed streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Monotonic wall-clock in milliseconds.
double now_ms();

}  // namespace pinnmg
