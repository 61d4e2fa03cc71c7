#include "run_config.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace pinnmg::cli {

std::string default_out_root() {
  if (const char* env = std::getenv("PINNMG_OUT_ROOT")) return env;
  return "runs";
}

InteriorShape parse_interior_shape(const std::string& text) {
  const auto x = text.find_first_of("xX*");
  try {
    if (x == std::string::npos) {
      const long n = std::stol(text);
      if (n < 1) throw std::invalid_argument("");
      return InteriorShape::flat(static_cast<std::size_t>(n));
    }
    const int nx = std::stoi(text.substr(0, x));
    const int ny = std::stoi(text.substr(x + 1));
    if (nx < 1 || ny < 1) throw std::invalid_argument("");
    return InteriorShape::grid(nx, ny);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse interior shape '" + text +
                                "' (expected N or NXxNY)");
  }
}

Problem RunConfig::make_problem_instance() const {
  Problem p = pinnmg::make_problem(problem);
  p.polytrig_literal = polytrig_literal;
  return p;
}

NetworkConfig RunConfig::make_network() const {
  NetworkConfig cfg;
  cfg.layer_sizes.push_back(2);
  cfg.layer_sizes.insert(cfg.layer_sizes.end(), hidden.begin(), hidden.end());
  cfg.layer_sizes.push_back(1);
  cfg.activation = activation;
  cfg.laaf_factor = laaf_factor;
  cfg.precision = precision;
  return cfg;
}

InteriorShape RunConfig::interior_shape() const { return parse_interior_shape(interior); }

TrainSchedule RunConfig::make_schedule() const {
  TrainSchedule s;
  s.adam_epochs = adam_epochs;
  s.adam_learning_rate = learning_rate;
  s.lbfgs_max_epochs = lbfgs_epochs;
  s.ftol = ftol;
  s.lbfgs_history = lbfgs_history;
  s.wolfe = {wolfe_c1, wolfe_c2};
  s.gradient_tolerance = gradient_tolerance;
  if (target_loss > 0.0) s.target_loss = target_loss;
  s.boundary_weight = boundary_weight;
  return s;
}

std::string RunConfig::provenance() const {
  std::ostringstream os;
  os << "pinnmg " << kVersion << " " << subcommand;
  os << " problem=" << to_string(problem);
  if (problem == ProblemId::PolyTrig) {
    os << " polytrig_variant=" << (polytrig_literal ? "literal" : "sine");
  }
  os << " hidden=";
  for (std::size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
  os << " activation=" << to_string(activation);
  if (laaf_factor > 0) os << " laaf_factor=" << laaf_factor;
  os << " precision=" << to_string(precision);
  os << " dist=" << to_string(distribution) << " interior=" << interior
     << " boundary=" << boundary << " data_seed=" << data_seed;
  os << " seed=" << seed;
  if (!init_checkpoint.empty()) os << " init_ckpt=" << init_checkpoint;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << " adam_epochs=" << adam_epochs << " lr=" << num(learning_rate)
     << " lbfgs_epochs=" << lbfgs_epochs << " ftol=" << num(ftol) << " m=" << lbfgs_history
     << " c1=" << num(wolfe_c1) << " c2=" << num(wolfe_c2)
     << " gtol=" << num(gradient_tolerance) << " target_loss=" << num(target_loss)
     << " boundary_weight=" << num(boundary_weight);
  if (subcommand == "gs" || subcommand == "cg") {
    os << " n=" << grid_n << " max_iters=" << max_iters;
    if (subcommand == "gs") os << " delta=" << num(delta);
    if (subcommand == "cg") os << " rtol=" << num(rtol);
  }
  if (subcommand == "hybrid") {
    os << " coarse=" << coarse_n << " fine=" << fine_n << " ftol=" << num(ftol)
       << " delta=" << num(delta) << " lbfgs_cap=" << lbfgs_cap
       << " sweeps=" << sweeps_per_level;
  }
  if (infer_grid > 0) os << " infer_grid=" << infer_grid;
  return os.str();
}

void RunConfig::validate() const {
  make_network().validate();
  if (boundary < 4) throw std::invalid_argument("boundary count must be >= 4");
  interior_shape();
  if (distribution == Distribution::Uniform && !interior_shape().has_grid()) {
    throw std::invalid_argument("uniform distribution needs an NXxNY interior shape");
  }
  if (adam_epochs < 0 || lbfgs_epochs < 0) {
    throw std::invalid_argument("epoch budgets must be >= 0");
  }
  if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (ftol < 0.0) throw std::invalid_argument("ftol must be >= 0");
  if (lbfgs_history < 1) throw std::invalid_argument("lbfgs history must be >= 1");
  if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw std::invalid_argument("wolfe constants must satisfy 0 < c1 < c2 < 1");
  }
  if (subcommand == "gs" || subcommand == "cg") {
    if (grid_n < 2) throw std::invalid_argument("grid label must be >= 2");
    if (subcommand == "gs" && delta <= 0.0) {
      throw std::invalid_argument("delta must be positive");
    }
    if (subcommand == "cg" && rtol <= 0.0) {
      throw std::invalid_argument("rtol must be positive");
    }
  }
}

}  // namespace pinnmg::cli
