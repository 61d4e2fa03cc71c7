#include "pinnmg/net.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "packed_net.hpp"

namespace pinnmg {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint/grid formats are little-endian; big-endian hosts are unsupported");

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

const char* to_string(ActivationKind k) {
  switch (k) {
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Swish: return "swish";
    case ActivationKind::Sine: return "sine";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::LaafTanh: return "laaf-tanh";
    case ActivationKind::LaafSigmoid: return "laaf-sigmoid";
    case ActivationKind::LaafSwish: return "laaf-swish";
  }
  return "?";
}

ActivationKind activation_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ActivationKind::LaafSwish); ++i) {
    const auto k = static_cast<ActivationKind>(i);
    if (s == to_string(k)) return k;
  }
  fail("unknown activation: " + std::string(s));
}

bool is_adaptive(ActivationKind k) {
  return k == ActivationKind::LaafTanh || k == ActivationKind::LaafSigmoid ||
         k == ActivationKind::LaafSwish;
}

bool is_smooth(ActivationKind k) { return k != ActivationKind::Relu; }

ActivationKind base_kind(ActivationKind k) {
  switch (k) {
    case ActivationKind::LaafTanh: return ActivationKind::Tanh;
    case ActivationKind::LaafSigmoid: return ActivationKind::Sigmoid;
    case ActivationKind::LaafSwish: return ActivationKind::Swish;
    default: return k;
  }
}

std::size_t NetworkConfig::parameter_count() const {
  return ParameterLayout::of(*this).total;
}

void NetworkConfig::validate() const {
  if (layer_sizes.size() < 3) fail("network needs at least one hidden layer");
  if (layer_sizes.front() != 2) fail("input layer size must be 2 (x,y)");
  if (layer_sizes.back() != 1) fail("output layer size must be 1");
  for (int s : layer_sizes) {
    if (s <= 0) fail("layer sizes must be positive");
  }
  if (is_adaptive(activation)) {
    if (laaf_factor <= 0) fail("adaptive activation requires a positive laaf factor");
  } else if (laaf_factor != 0) {
    fail("laaf factor is only valid with an adaptive activation");
  }
}

ParameterLayout ParameterLayout::of(const NetworkConfig& config) {
  ParameterLayout layout;
  std::size_t off = 0;
  const int layers = config.affine_layers();
  layout.weight_offset.resize(layers);
  layout.bias_offset.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const std::size_t fan_in = config.layer_sizes[l];
    const std::size_t fan_out = config.layer_sizes[l + 1];
    layout.weight_offset[l] = off;
    off += fan_in * fan_out;
    layout.bias_offset[l] = off;
    off += fan_out;
  }
  layout.slope_offset = off;
  if (is_adaptive(config.activation)) off += config.hidden_layers();
  layout.total = off;
  return layout;
}

ActivationTriple activation_eval(ActivationKind kind, double z) {
  if (is_adaptive(kind)) fail("adaptive activation requires a slope");
  const auto d = detail::base_derivs(kind, z);
  return {d.v, d.d1, d.d2};
}

ActivationTriple activation_eval(ActivationKind kind, int factor, double slope, double z) {
  if (!is_adaptive(kind)) fail("slope given for a non-adaptive activation");
  if (factor <= 0) fail("laaf factor must be positive");
  const double s = factor * slope;
  const auto d = detail::base_derivs(base_kind(kind), s * z);
  return {d.v, s * d.d1, s * s * d.d2};
}

Parameters xavier_init(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  const auto layout = ParameterLayout::of(config);
  Parameters params(layout.total, 0.0);
  const int layers = config.affine_layers();
  for (int l = 0; l < layers; ++l) {
    const int fan_in = config.layer_sizes[l];
    const int fan_out = config.layer_sizes[l + 1];
    const double stddev = std::sqrt(2.0 / (fan_in + fan_out));
    NormalSampler sampler(mix_seed(seed, static_cast<std::uint64_t>(l)));
    double* w = params.data() + layout.weight_offset[l];
    for (int i = 0; i < fan_in * fan_out; ++i) w[i] = stddev * sampler.next();
    // biases stay zero
  }
  if (is_adaptive(config.activation)) {
    const double a0 = 1.0 / config.laaf_factor;
    for (int h = 0; h < config.hidden_layers(); ++h) params[layout.slope_offset + h] = a0;
  }
  return params;
}

namespace {

template <typename T>
std::vector<double> forward_impl(const Parameters& params, const NetworkConfig& config,
                                 std::span<const Point> points) {
  auto net = detail::PackedNet<T>::make(config);
  net.set_params(params);
  std::vector<double> out(points.size());
  const std::size_t n_blocks =
      (points.size() + kReductionBlock - 1) / kReductionBlock;
  std::vector<detail::Workspace<T>> ws;
  ws.reserve(worker_thread_count());
  for (std::size_t i = 0; i < worker_thread_count(); ++i) ws.emplace_back(net.sizes);
  parallel_blocks(n_blocks, [&](std::size_t blk, std::size_t worker) {
    const std::size_t lo = blk * kReductionBlock;
    const int b = static_cast<int>(std::min(kReductionBlock, points.size() - lo));
    auto& w = ws[worker];
    detail::forward_block_value(net, points.data() + lo, b, w);
    const T* y = w.pre.back().data();
    for (int p = 0; p < b; ++p) out[lo + p] = static_cast<double>(y[p]);
  });
  return out;
}

}  // namespace

std::vector<double> forward(const Parameters& params, const NetworkConfig& config,
                            std::span<const Point> points) {
  config.validate();
  if (params.size() != config.parameter_count()) {
    fail("parameter vector does not match the network layout");
  }
  if (config.precision == Precision::Float32) {
    return forward_impl<float>(params, config, points);
  }
  return forward_impl<double>(params, config, points);
}

namespace {

void write_bytes(std::ofstream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename U>
void write_scalar(std::ofstream& os, U v) {
  write_bytes(os, &v, sizeof(v));
}

template <typename U>
U read_scalar(std::ifstream& is, const std::filesystem::path& path) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw std::runtime_error("checkpoint truncated: " + path.string());
  }
  return v;
}

}  // namespace

void save_checkpoint(const NetworkConfig& config, const Parameters& params,
                     std::string_view provenance, const std::filesystem::path& path) {
  config.validate();
  if (params.size() != config.parameter_count()) {
    fail("parameter vector does not match the network layout");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  write_bytes(os, "PINN", 4);
  write_scalar<std::uint32_t>(os, kCheckpointVersion);
  write_scalar<std::uint32_t>(os, static_cast<std::uint32_t>(config.layer_sizes.size()));
  for (int s : config.layer_sizes) write_scalar<std::uint32_t>(os, static_cast<std::uint32_t>(s));
  write_scalar<std::uint8_t>(os, static_cast<std::uint8_t>(config.activation));
  write_scalar<std::uint8_t>(os, static_cast<std::uint8_t>(config.laaf_factor));
  write_scalar<std::uint32_t>(os, static_cast<std::uint32_t>(provenance.size()));
  write_bytes(os, provenance.data(), provenance.size());
  write_scalar<std::uint64_t>(os, params.size());
  for (double v : params) write_scalar<float>(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "PINN", 4) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic): " + path.string());
  }
  const auto version = read_scalar<std::uint32_t>(is, path);
  if (version > kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) +
                             ": " + path.string());
  }
  Checkpoint ckpt;
  const auto n_layers = read_scalar<std::uint32_t>(is, path);
  if (n_layers < 3 || n_layers > 64) {
    throw std::runtime_error("corrupt checkpoint (layer count): " + path.string());
  }
  ckpt.config.layer_sizes.resize(n_layers);
  for (auto& s : ckpt.config.layer_sizes) {
    s = static_cast<int>(read_scalar<std::uint32_t>(is, path));
  }
  ckpt.config.activation = static_cast<ActivationKind>(read_scalar<std::uint8_t>(is, path));
  ckpt.config.laaf_factor = read_scalar<std::uint8_t>(is, path);
  const auto prov_len = read_scalar<std::uint32_t>(is, path);
  ckpt.provenance.resize(prov_len);
  if (prov_len > 0 && !is.read(ckpt.provenance.data(), prov_len)) {
    throw std::runtime_error("checkpoint truncated: " + path.string());
  }
  const auto n_params = read_scalar<std::uint64_t>(is, path);
  ckpt.config.validate();
  if (n_params != ckpt.config.parameter_count()) {
    throw std::runtime_error("checkpoint parameter count does not match its architecture: " +
                             path.string());
  }
  ckpt.params.resize(n_params);
  for (auto& v : ckpt.params) v = static_cast<double>(read_scalar<float>(is, path));
  return ckpt;
}

}  // namespace pinnmg
