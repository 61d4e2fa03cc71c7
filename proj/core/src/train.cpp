#include "pinnmg/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace pinnmg {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Ftol: return "ftol";
    case StopReason::MaxEpochs: return "max-epochs";
    case StopReason::GradientTol: return "gradient-tol";
    case StopReason::TargetLoss: return "target-loss";
    case StopReason::LineSearchFailure: return "line-search-failure";
    case StopReason::NonFiniteLoss: return "non-finite-loss";
  }
  return "?";
}

const char* to_string(TrainPhase p) {
  switch (p) {
    case TrainPhase::Init: return "init";
    case TrainPhase::Adam: return "adam";
    case TrainPhase::Lbfgs: return "lbfgs";
  }
  return "?";
}

bool ftol_stop(double r_k, double r_k1, double ftol) {
  return (r_k - r_k1) / std::max({std::abs(r_k), std::abs(r_k1), 1.0}) <= ftol;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

struct AdamInternal {
  Parameters params;
  std::vector<EpochRecord> history;
  StopReason stop = StopReason::MaxEpochs;
  int epochs_run = 0;
};

AdamInternal adam_internal(const Objective& objective, Parameters params, int epochs,
                           double lr, int epoch_offset, double wall_offset,
                           const EpochCallback& callback) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  const std::size_t n = params.size();
  AdamInternal out;
  std::vector<double> grad(n), m(n, 0.0), v(n, 0.0);
  const double t0 = now_ms();
  double b1t = 1.0, b2t = 1.0;
  for (int t = 1; t <= epochs; ++t) {
    const double loss = objective(params, grad);
    if (!std::isfinite(loss) || !all_finite(grad)) {
      out.stop = StopReason::NonFiniteLoss;
      break;
    }
    out.history.push_back(
        {epoch_offset + t, TrainPhase::Adam, loss, wall_offset + (now_ms() - t0)});
    if (callback) callback(epoch_offset + t, TrainPhase::Adam, loss, params);
    b1t *= kBeta1;
    b2t *= kBeta2;
    const double m_corr = 1.0 / (1.0 - b1t);
    const double v_corr = 1.0 / (1.0 - b2t);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] * m_corr) / (std::sqrt(v[i] * v_corr) + kEps);
    }
    out.epochs_run = t;
  }
  out.params = std::move(params);
  return out;
}

struct LineSearchOutcome {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
};

struct WolfeProbe {
  const Objective& objective;
  const Parameters& x0;
  std::span<const double> dir;
  Parameters trial;

  WolfeProbe(const Objective& objective, const Parameters& x0, std::span<const double> dir)
      : objective(objective), x0(x0), dir(dir), trial(x0.size()) {}

  // phi(alpha) and phi'(alpha); gradient left in `grad`.
  double operator()(double alpha, std::vector<double>& grad, double& dphi) {
    for (std::size_t i = 0; i < x0.size(); ++i) trial[i] = x0[i] + alpha * dir[i];
    const double f = objective(trial, grad);
    dphi = dot(grad, dir);
    return f;
  }
};

// Cubic Hermite minimizer for zoom interpolation; falls back to bisection.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0.0 || !std::isfinite(disc)) return 0.5 * (a + b);
  const double d2 = (b > a ? 1.0 : -1.0) * std::sqrt(disc);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0 || !std::isfinite(denom)) return 0.5 * (a + b);
  double step = b - (b - a) * (db + d2 - d1) / denom;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double guard = 0.05 * (hi - lo);
  if (!std::isfinite(step) || step < lo + guard || step > hi - guard) {
    step = 0.5 * (a + b);
  }
  return step;
}

// Strong Wolfe line search (bracket + zoom). Acceptance also admits the
// approximate Wolfe conditions once |f - f0| sits under the floating-point
// floor of f, where the plain Armijo comparison is noise. Accepted steps
// with a large remaining slope are refined toward 1-D stationarity with
// secant steps; on quadratic objectives that makes the search exact, which
// keeps L-BFGS equivalent to conjugate gradients there. On success the
// accepted point is written into x / f / grad.
LineSearchOutcome strong_wolfe(const Objective& objective, Parameters& x, double& f,
                               std::vector<double>& grad, std::span<const double> dir,
                               const WolfeParams& wolfe) {
  constexpr int kMaxBracket = 20;
  constexpr int kMaxZoom = 30;
  constexpr double kPolishTrigger = 0.1;  // refine while |phi'| > trigger * |phi'(0)|
  constexpr int kMaxPolish = 2;
  const double f0 = f;
  const double dphi0 = dot(grad, dir);
  if (!(dphi0 < 0.0)) return {};
  const double f_floor = 1e-12 * std::max(1.0, std::abs(f0));

  WolfeProbe probe(objective, x, dir);
  std::vector<double> g_trial(x.size());

  auto acceptable = [&](double alpha, double fa, double dphi) {
    if (!std::isfinite(fa)) return false;
    const bool exact_wolfe =
        fa <= f0 + wolfe.c1 * alpha * dphi0 && std::abs(dphi) <= -wolfe.c2 * dphi0;
    const bool approx_wolfe = fa <= f0 + f_floor && dphi >= wolfe.c2 * dphi0 &&
                              dphi <= (2.0 * wolfe.c1 - 1.0) * dphi0;
    return exact_wolfe || approx_wolfe;
  };

  auto accept = [&](double alpha, double fa, double dphi) {
    for (int i = 0; i < kMaxPolish && std::abs(dphi) > kPolishTrigger * std::abs(dphi0); ++i) {
      const double denom = dphi0 - dphi;
      if (!(denom < 0.0) || !std::isfinite(denom)) break;
      const double refined = alpha * dphi0 / denom;  // secant zero of phi'
      if (!(refined > 0.0) || refined > 8.0 * alpha) break;
      std::vector<double> g_keep = g_trial;
      Parameters x_keep = probe.trial;
      double dphi_r = 0.0;
      const double fr = probe(refined, g_trial, dphi_r);
      if (acceptable(refined, fr, dphi_r) && fr <= fa) {
        alpha = refined;
        fa = fr;
        dphi = dphi_r;
      } else {
        g_trial = std::move(g_keep);
        probe.trial = std::move(x_keep);
        break;
      }
    }
    x = probe.trial;
    f = fa;
    grad = g_trial;
    return LineSearchOutcome{true, alpha, fa};
  };

  auto zoom = [&](double a_lo, double f_lo, double d_lo, double a_hi, double f_hi,
                  double d_hi) -> LineSearchOutcome {
    for (int i = 0; i < kMaxZoom; ++i) {
      if (std::abs(a_hi - a_lo) < 1e-16 * std::max(1.0, std::abs(a_lo))) break;
      const double alpha = cubic_step(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi);
      double dphi = 0.0;
      const double fa = probe(alpha, g_trial, dphi);
      if (acceptable(alpha, fa, dphi)) return accept(alpha, fa, dphi);
      if (!std::isfinite(fa) || fa > f0 + wolfe.c1 * alpha * dphi0 || fa >= f_lo) {
        a_hi = alpha;
        f_hi = fa;
        d_hi = dphi;
        continue;
      }
      if (dphi * (a_hi - a_lo) >= 0.0) {
        a_hi = a_lo;
        f_hi = f_lo;
        d_hi = d_lo;
      }
      a_lo = alpha;
      f_lo = fa;
      d_lo = dphi;
    }
    // Interval exhausted: fall back to the best sufficient-decrease point.
    if (f_lo < f0) {
      double dphi = 0.0;
      const double fa = probe(a_lo, g_trial, dphi);
      if (std::isfinite(fa) && fa < f0) return accept(a_lo, fa, dphi);
    }
    return {};
  };

  double a_prev = 0.0, f_prev = f0, d_prev = dphi0;
  double alpha = 1.0;
  for (int i = 1; i <= kMaxBracket; ++i) {
    double dphi = 0.0;
    const double fa = probe(alpha, g_trial, dphi);
    if (acceptable(alpha, fa, dphi)) return accept(alpha, fa, dphi);
    if (!std::isfinite(fa) || fa > f0 + wolfe.c1 * alpha * dphi0 || (i > 1 && fa >= f_prev)) {
      return zoom(a_prev, f_prev, d_prev, alpha, fa, dphi);
    }
    if (dphi >= 0.0) return zoom(alpha, fa, dphi, a_prev, f_prev, d_prev);
    a_prev = alpha;
    f_prev = fa;
    d_prev = dphi;
    alpha *= 2.0;
    if (alpha > 1e10) break;
  }
  return {};
}

struct LbfgsInternal {
  Parameters params;
  std::vector<EpochRecord> history;
  StopReason stop = StopReason::MaxEpochs;
  double final_loss = 0.0;
  int epochs_run = 0;
};

LbfgsInternal lbfgs_internal(const Objective& objective, Parameters x,
                             const TrainSchedule& sched, int epoch_offset, double wall_offset,
                             const EpochCallback& callback) {
  const std::size_t n = x.size();
  const int m = std::max(1, sched.lbfgs_history);
  LbfgsInternal out;
  std::vector<double> g(n);
  const double t0 = now_ms();

  double f = objective(x, g);
  if (!std::isfinite(f) || !all_finite(g)) {
    out.stop = StopReason::NonFiniteLoss;
    out.params = std::move(x);
    out.final_loss = f;
    return out;
  }

  Parameters best_x = x;
  double best_f = f;

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(n), q(n), alpha_coef;

  auto two_loop = [&]() {
    q = g;
    const std::size_t k = s_hist.size();
    alpha_coef.assign(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
      alpha_coef[i] = rho_hist[i] * dot(s_hist[i], q);
      const auto& y = y_hist[i];
      for (std::size_t j = 0; j < n; ++j) q[j] -= alpha_coef[i] * y[j];
    }
    if (k > 0) {
      const double gamma =
          dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (double& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], q);
      const auto& s = s_hist[i];
      for (std::size_t j = 0; j < n; ++j) q[j] += (alpha_coef[i] - beta) * s[j];
    }
    for (std::size_t j = 0; j < n; ++j) dir[j] = -q[j];
  };

  std::vector<double> x_old(n), g_old(n);
  for (int k = 1; k <= sched.lbfgs_max_epochs; ++k) {
    if (norm2(g) <= sched.gradient_tolerance) {
      out.stop = StopReason::GradientTol;
      break;
    }
    two_loop();
    if (dot(g, dir) >= 0.0) {
      // Degenerate curvature memory: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < n; ++j) dir[j] = -g[j];
    }
    x_old = x;
    g_old = g;
    const double f_old = f;
    const auto ls = strong_wolfe(objective, x, f, g, dir, sched.wolfe);
    if (!ls.ok) {
      out.stop = StopReason::LineSearchFailure;
      x = best_x;
      f = best_f;
      break;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = x[j] - x_old[j];
      y[j] = g[j] - g_old[j];
    }
    const double sy = dot(s, y);
    if (sy > 1e-10 * norm2(s) * norm2(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > m) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    out.epochs_run = k;
    out.history.push_back(
        {epoch_offset + k, TrainPhase::Lbfgs, f, wall_offset + (now_ms() - t0)});
    if (callback) callback(epoch_offset + k, TrainPhase::Lbfgs, f, x);

    if (ftol_stop(f_old, f, sched.ftol)) {
      out.stop = StopReason::Ftol;
      break;
    }
    if (norm2(g) <= sched.gradient_tolerance) {
      out.stop = StopReason::GradientTol;
      break;
    }
    if (sched.target_loss && f <= *sched.target_loss) {
      out.stop = StopReason::TargetLoss;
      break;
    }
  }
  out.params = std::move(x);
  out.final_loss = f;
  return out;
}

Objective wrap(const ResidualEvaluator& eval) {
  return [&eval](const Parameters& x, std::span<double> grad) {
    return eval.loss_gradient(x, grad).total;
  };
}

}  // namespace

AdamResult adam_minimize(const Objective& objective, Parameters x0, int epochs,
                         double learning_rate, const EpochCallback& callback) {
  if (epochs < 0) throw std::invalid_argument("adam: epochs must be >= 0");
  if (learning_rate <= 0.0) throw std::invalid_argument("adam: learning rate must be positive");
  auto r = adam_internal(objective, std::move(x0), epochs, learning_rate, 0, 0.0, callback);
  return {std::move(r.params), std::move(r.history), r.stop};
}

AdamResult adam_run(const Parameters& params, const NetworkConfig& config,
                    const TrainingSet& set, const Problem& problem, int epochs,
                    double learning_rate, std::uint64_t /*seed*/,
                    const EpochCallback& callback) {
  if (epochs < 0) throw std::invalid_argument("adam: epochs must be >= 0");
  if (learning_rate <= 0.0) throw std::invalid_argument("adam: learning rate must be positive");
  ResidualEvaluator eval(config, set, problem);
  auto r = adam_internal(wrap(eval), params, epochs, learning_rate, 0, 0.0, callback);
  return {std::move(r.params), std::move(r.history), r.stop};
}

LbfgsResult lbfgs_minimize(const Objective& objective, Parameters x0,
                           const TrainSchedule& schedule, const EpochCallback& callback) {
  auto r = lbfgs_internal(objective, std::move(x0), schedule, 0, 0.0, callback);
  return {std::move(r.params), std::move(r.history), r.stop, r.final_loss, r.epochs_run};
}

LbfgsResult lbfgs_run(const Parameters& params, const NetworkConfig& config,
                      const TrainingSet& set, const Problem& problem,
                      const TrainSchedule& schedule, const EpochCallback& callback) {
  ResidualEvaluator eval(config, set, problem, schedule.boundary_weight);
  auto r = lbfgs_internal(wrap(eval), params, schedule, 0, 0.0, callback);
  return {std::move(r.params), std::move(r.history), r.stop, r.final_loss, r.epochs_run};
}

TrainReport train_pinn(const NetworkConfig& config, const InitSpec& init, const TrainingSet& set,
                       const Problem& problem, const TrainSchedule& schedule,
                       const EpochCallback& callback) {
  config.validate();
  Parameters params;
  if (init.is_checkpoint()) {
    const auto ckpt = load_checkpoint(std::get<std::filesystem::path>(init.source));
    if (ckpt.config.layer_sizes != config.layer_sizes ||
        ckpt.config.activation != config.activation ||
        ckpt.config.laaf_factor != config.laaf_factor) {
      throw std::invalid_argument("checkpoint architecture does not match the trainer config");
    }
    params = ckpt.params;
  } else {
    params = xavier_init(config, std::get<std::uint64_t>(init.source));
  }

  ResidualEvaluator eval(config, set, problem, schedule.boundary_weight);
  TrainReport report;
  const double t0 = now_ms();
  const double initial_loss = eval.loss(params).total;
  report.history.push_back({0, TrainPhase::Init, initial_loss, 0.0});
  if (callback) callback(0, TrainPhase::Init, initial_loss, params);

  const Objective objective = wrap(eval);
  auto adam = adam_internal(objective, std::move(params), schedule.adam_epochs,
                            schedule.adam_learning_rate, 0, now_ms() - t0, callback);
  report.adam_epochs_run = adam.epochs_run;
  report.history.insert(report.history.end(), adam.history.begin(), adam.history.end());
  if (adam.stop == StopReason::NonFiniteLoss) {
    report.stop_reason = StopReason::NonFiniteLoss;
    report.final_params = std::move(adam.params);
    report.final_loss = adam.history.empty() ? initial_loss : adam.history.back().loss;
    return report;
  }

  if (schedule.lbfgs_max_epochs > 0) {
    auto lbfgs = lbfgs_internal(objective, std::move(adam.params), schedule, adam.epochs_run,
                                now_ms() - t0, callback);
    report.lbfgs_epochs_run = lbfgs.epochs_run;
    report.history.insert(report.history.end(), lbfgs.history.begin(), lbfgs.history.end());
    report.stop_reason = lbfgs.stop;
    report.final_params = std::move(lbfgs.params);
    report.final_loss = lbfgs.final_loss;
  } else {
    report.stop_reason = StopReason::MaxEpochs;
    report.final_loss =
        adam.epochs_run > 0 ? eval.loss(adam.params).total : initial_loss;
    report.final_params = std::move(adam.params);
  }
  return report;
}

void write_loss_history_csv(const TrainReport& report, const std::filesystem::path& path,
                            std::string_view provenance) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open loss history for writing: " + path.string());
  if (!provenance.empty()) os << "# " << provenance << "\n";
  os << "epoch,phase,loss,wall_ms\n";
  char buf[32];
  for (const auto& rec : report.history) {
    std::snprintf(buf, sizeof(buf), "%.17g", rec.loss);
    os << rec.epoch << "," << to_string(rec.phase) << "," << buf << ","
       << static_cast<long long>(rec.wall_ms) << "\n";
  }
  if (!os) throw std::runtime_error("loss history write failed: " + path.string());
}

}  // namespace pinnmg
