#include "pinnmg/common.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pinnmg {

const char* to_string(Precision p) {
  return p == Precision::Float32 ? "32" : "64";
}

Precision precision_from_string(std::string_view s) {
  if (s == "32" || s == "float32" || s == "single") return Precision::Float32;
  if (s == "64" || s == "float64" || s == "double") return Precision::Float64;
  throw std::invalid_argument("unknown precision: " + std::string(s));
}

double pairwise_sum(std::span<const double> v) {
  // Full binary tree down to single leaves: appending a duplicate of the
  // whole range then doubles every partial sum exactly.
  switch (v.size()) {
    case 0: return 0.0;
    case 1: return v[0];
    case 2: return v[0] + v[1];
    default: break;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

std::size_t worker_thread_count() {
  static const std::size_t n = [] {
    if (const char* env = std::getenv("PINNMG_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<std::size_t>(hw == 0 ? 1 : hw);
  }();
  return n;
}

void parallel_blocks(std::size_t n_blocks,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_thread_count(), n_blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b, 0);
    return;
  }
  // Dynamic assignment for load balance; per-block results do not depend on
  // which worker computes them, so this stays deterministic.
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, &next, n_blocks, w] {
      for (;;) {
        const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
        if (b >= n_blocks) break;
        fn(b, w);
      }
    });
  }
  for (auto& t : pool) t.join();
}

double NormalSampler::next_uniform() {
  // Cell-centred dyadic value in (0,1): never exactly 0 or 1.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double NormalSampler::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

}  // namespace pinnmg
