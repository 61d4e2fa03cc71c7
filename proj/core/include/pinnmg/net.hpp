#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinnmg/common.hpp"

namespace pinnmg {

enum class ActivationKind : std::uint8_t {
  Tanh = 0,
  Sigmoid = 1,
  Swish = 2,
  Sine = 3,
  Relu = 4,
  LaafTanh = 5,
  LaafSigmoid = 6,
  LaafSwish = 7,
};

const char* to_string(ActivationKind k);
ActivationKind activation_from_string(std::string_view s);

/// True for the per-layer adaptive (LAAF) variants, which carry one
/// trainable slope per hidden layer.
bool is_adaptive(ActivationKind k);

/// True when the second derivative exists everywhere (everything but relu).
bool is_smooth(ActivationKind k);

/// Underlying scalar function of an adaptive kind (laaf-tanh -> tanh).
ActivationKind base_kind(ActivationKind k);

/// Fully-connected surrogate architecture: input (x,y), one scalar output.
struct NetworkConfig {
  std::vector<int> layer_sizes;  // first = 2, last = 1, >=1 hidden layer
  ActivationKind activation = ActivationKind::Tanh;
  int laaf_factor = 0;  // fixed n of the adaptive pre-scale; 0 = none
  Precision precision = Precision::Float64;

  int affine_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int hidden_layers() const { return affine_layers() - 1; }
  std::size_t parameter_count() const;

  /// Throws std::invalid_argument on any violated structural invariant.
  void validate() const;

  bool operator==(const NetworkConfig&) const = default;
};

/// Flat trainable vector. Layout: for each affine layer l, weight matrix W_l
/// row-major (fan_out x fan_in) then bias b_l; followed by one LAAF slope per
/// hidden layer when the activation is adaptive.
using Parameters = std::vector<double>;

struct ParameterLayout {
  std::vector<std::size_t> weight_offset;
  std::vector<std::size_t> bias_offset;
  std::size_t slope_offset = 0;  // valid only when adaptive
  std::size_t total = 0;
  static ParameterLayout of(const NetworkConfig& config);
};

struct ActivationTriple {
  double value;
  double d1;
  double d2;
};

/// Value and exact first/second derivative of a non-adaptive activation.
ActivationTriple activation_eval(ActivationKind kind, double z);

/// Adaptive variant: the function applied is sigma(n*a*z) with n = factor
/// and a = the layer's trainable slope; derivatives are with respect to z.
ActivationTriple activation_eval(ActivationKind kind, int factor, double slope, double z);

/// Glorot-normal weights (variance 2/(fan_in+fan_out)), zero biases, LAAF
/// slopes at 1/n. Each layer draws from its own seed stream, so deepening a
/// network does not change the draws of earlier layers.
Parameters xavier_init(const NetworkConfig& config, std::uint64_t seed);

/// Batch inference in the configured precision; output order matches input.
std::vector<double> forward(const Parameters& params, const NetworkConfig& config,
                            std::span<const Point> points);

struct Checkpoint {
  NetworkConfig config;
  Parameters params;
  std::string provenance;
};

/// Binary checkpoint: "PINN" magic, u32 version, layer sizes, activation id,
/// laaf factor, provenance, float32 LE parameter vector. 64-bit parameters
/// are narrowed to 32 bits on write.
void save_checkpoint(const NetworkConfig& config, const Parameters& params,
                     std::string_view provenance, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace pinnmg
