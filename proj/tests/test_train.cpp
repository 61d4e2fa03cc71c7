#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pinnmg/train.hpp"

using namespace pinnmg;

namespace {

// Random SPD quadratic f(x) = 1/2 x'Ax - b'x with A = M'M + 0.5 I.
struct Quadratic {
  int n;
  std::vector<double> A, b;

  explicit Quadratic(int n, std::uint64_t seed) : n(n), A(n * n, 0.0), b(n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> M(n * n);
    for (auto& v : M) v = nd(rng);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) A[i * n + j] += M[k * n + i] * M[k * n + j];
      }
      A[i * n + i] += 0.5;
    }
    for (auto& v : b) v = nd(rng);
  }

  Objective objective() const {
    return [this](const Parameters& x, std::span<double> g) {
      double f = 0.0;
      for (int i = 0; i < n; ++i) {
        double ax = 0.0;
        for (int j = 0; j < n; ++j) ax += A[i * n + j] * x[j];
        g[i] = ax - b[i];
        f += 0.5 * x[i] * ax - b[i] * x[i];
      }
      return f;
    };
  }

  double gradient_norm(const Parameters& x) const {
    std::vector<double> g(n);
    objective()(x, g);
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
  }
};

TrainingSet tiny_foursines_set(std::size_t interior = 200, std::size_t boundary = 48) {
  const Problem fs = make_problem(ProblemId::FourSines);
  return make_training_set(Distribution::Sobol, InteriorShape::flat(interior), boundary, fs,
                           1);
}

NetworkConfig tiny_net() {
  NetworkConfig cfg;
  cfg.layer_sizes = {2, 10, 10, 1};
  return cfg;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("ftol rule arithmetic") {
  CHECK(ftol_stop(1.0, 0.9999, 1e-4));
  CHECK_FALSE(ftol_stop(1.0, 0.999, 1e-4));
  // denominators below 1 clamp to 1
  CHECK(ftol_stop(1e-3, 0.95e-3, 1e-4));
  CHECK_FALSE(ftol_stop(200.0, 199.9, 1e-4));  // ratio 5e-4
  CHECK(ftol_stop(200.0, 199.999, 1e-4));      // ratio 5e-9
  // no decrease always trips the rule, even at ftol = 0
  CHECK(ftol_stop(1.0, 1.0, 0.0));
}

TEST_CASE("adam leaves parameters untouched for a zero-epoch budget") {
  const auto cfg = tiny_net();
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  const Parameters params = xavier_init(cfg, 4);
  const auto r = adam_run(params, cfg, set, fs, 0, 1e-3, 0);
  CHECK(r.params == params);
  CHECK(r.history.empty());
}

TEST_CASE("adam first step has the closed-form size") {
  // constant-gradient surrogate: step = lr * g / (sqrt(g^2) + eps)
  const double g = 3.0;
  const Objective lin = [g](const Parameters& x, std::span<double> grad) {
    grad[0] = g;
    return g * x[0];
  };
  const auto r = adam_minimize(lin, {5.0}, 1, 1e-3);
  const double expected_step = 1e-3 * g / (std::sqrt(g * g) + 1e-8);
  CHECK(5.0 - r.params[0] == doctest::Approx(expected_step).epsilon(1e-12));
  // sign-following: a negative-gradient coordinate moves up
  const Objective neg = [g](const Parameters& x, std::span<double> grad) {
    grad[0] = -g;
    return -g * x[0];
  };
  const auto r2 = adam_minimize(neg, {5.0}, 1, 1e-3);
  CHECK(r2.params[0] > 5.0);
}

TEST_CASE("adam reduces the PINN loss on a tiny four-sine run") {
  const auto cfg = tiny_net();
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  const auto r = adam_run(xavier_init(cfg, 4), cfg, set, fs, 500, 1e-3, 0);
  REQUIRE(r.history.size() == 500);
  CHECK(r.history.back().loss < 0.5 * r.history.front().loss);
  // epochs strictly increasing
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].epoch == r.history[i - 1].epoch + 1);
  }
}

TEST_CASE("adam aborts on a non-finite objective and keeps the last finite state") {
  int calls = 0;
  const Objective explodes = [&calls](const Parameters& x, std::span<double> grad) {
    ++calls;
    grad[0] = 1.0;
    return calls > 3 ? std::numeric_limits<double>::quiet_NaN() : x[0];
  };
  const auto r = adam_minimize(explodes, {1.0}, 10, 1e-3);
  CHECK(r.stop_reason == StopReason::NonFiniteLoss);
  CHECK(r.history.size() == 3);
  CHECK(std::isfinite(r.params[0]));
}

TEST_CASE("lbfgs solves SPD quadratics to machine gradient in n+5 iterations") {
  for (std::uint64_t seed : {1, 2, 3, 17, 99}) {
    const Quadratic q(10, seed);
    TrainSchedule sched;
    sched.lbfgs_max_epochs = 30;  // example budget; expect far fewer
    sched.ftol = 0.0;
    sched.gradient_tolerance = 1e-11;
    std::mt19937_64 rng(seed + 1000);
    std::normal_distribution<double> nd;
    Parameters x0(10);
    for (auto& v : x0) v = 10.0 * nd(rng);
    const auto r = lbfgs_minimize(q.objective(), x0, sched);
    CHECK(r.epochs_run <= 15);  // dim + 5
    CHECK(q.gradient_norm(r.params) < 1e-10);
  }
}

TEST_CASE("lbfgs accepted steps never increase the loss") {
  const auto cfg = tiny_net();
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  TrainSchedule sched;
  sched.lbfgs_max_epochs = 120;
  sched.ftol = 0.0;
  sched.gradient_tolerance = 0.0;
  const auto r = lbfgs_run(xavier_init(cfg, 6), cfg, set, fs, sched);
  REQUIRE(r.history.size() >= 2);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    const double prev = r.history[i - 1].loss;
    // allow only the approximate-Wolfe floating-point floor
    CHECK(r.history[i].loss <= prev + 1e-12 * std::max(1.0, std::abs(prev)));
  }
}

TEST_CASE("lbfgs stop reasons fire as scheduled") {
  const Quadratic q(6, 5);
  Parameters x0(6, 2.0);

  TrainSchedule by_ftol;
  by_ftol.lbfgs_max_epochs = 100;
  by_ftol.ftol = 1e-3;
  by_ftol.gradient_tolerance = 0.0;
  CHECK(lbfgs_minimize(q.objective(), x0, by_ftol).stop_reason == StopReason::Ftol);

  TrainSchedule by_max;
  by_max.lbfgs_max_epochs = 2;
  by_max.ftol = 0.0;
  by_max.gradient_tolerance = 0.0;
  CHECK(lbfgs_minimize(q.objective(), x0, by_max).stop_reason == StopReason::MaxEpochs);

  TrainSchedule by_grad;
  by_grad.lbfgs_max_epochs = 100;
  by_grad.ftol = 0.0;
  by_grad.gradient_tolerance = 1e-8;
  CHECK(lbfgs_minimize(q.objective(), x0, by_grad).stop_reason == StopReason::GradientTol);

  TrainSchedule by_target;
  by_target.lbfgs_max_epochs = 100;
  by_target.ftol = 0.0;
  by_target.gradient_tolerance = 0.0;
  const Objective obj = q.objective();
  std::vector<double> g(6);
  by_target.target_loss = obj(x0, g) - 1.0;  // any decrease past this triggers
  const auto r = lbfgs_minimize(obj, x0, by_target);
  CHECK(r.stop_reason == StopReason::TargetLoss);
  CHECK(r.final_loss <= *by_target.target_loss);
}

TEST_CASE("train_pinn with an all-zero budget echoes the initial loss") {
  const auto cfg = tiny_net();
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  TrainSchedule sched;  // 0 adam + 0 lbfgs
  const auto report = train_pinn(cfg, InitSpec::xavier(3), set, fs, sched);
  REQUIRE(report.history.size() == 1);
  CHECK(report.history[0].phase == TrainPhase::Init);
  CHECK(report.history[0].epoch == 0);
  CHECK(report.final_loss == report.history[0].loss);
  CHECK(report.final_params == xavier_init(cfg, 3));
}

TEST_CASE("train_pinn rejects checkpoints with a different architecture") {
  const auto cfg = tiny_net();
  const auto path = std::filesystem::temp_directory_path() / "pinnmg_test_shape.ckpt";
  save_checkpoint(cfg, xavier_init(cfg, 1), "t", path);
  NetworkConfig other = cfg;
  other.layer_sizes = {2, 12, 10, 1};
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  CHECK_THROWS_AS(
      train_pinn(other, InitSpec::checkpoint(path), set, fs, TrainSchedule{}),
      std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("train_pinn is bit-deterministic in 64-bit mode") {
  const auto cfg = tiny_net();
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  TrainSchedule sched;
  sched.adam_epochs = 25;
  sched.lbfgs_max_epochs = 25;
  sched.ftol = 0.0;
  const auto a = train_pinn(cfg, InitSpec::xavier(7), set, fs, sched);
  const auto b = train_pinn(cfg, InitSpec::xavier(7), set, fs, sched);
  CHECK(a.final_params == b.final_params);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(a.history[i].epoch == b.history[i].epoch);
  }
}

TEST_CASE("train_pinn epoch numbering spans phases") {
  const auto cfg = tiny_net();
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  TrainSchedule sched;
  sched.adam_epochs = 10;
  sched.lbfgs_max_epochs = 8;
  sched.ftol = 0.0;
  sched.gradient_tolerance = 0.0;
  const auto report = train_pinn(cfg, InitSpec::xavier(2), set, fs, sched);
  REQUIRE(report.history.size() >= 2);
  for (std::size_t i = 1; i < report.history.size(); ++i) {
    CHECK(report.history[i].epoch > report.history[i - 1].epoch);
  }
  CHECK(report.adam_epochs_run == 10);
  CHECK(report.lbfgs_epochs_run <= 8);
}

TEST_CASE("adam loss is non-increasing over 100-epoch windows on the benchmark") {
  // stochastic-robust: at least 4 of 5 seeds
  const Problem fs = make_problem(ProblemId::FourSines);
  NetworkConfig cfg;
  cfg.layer_sizes = {2, 50, 50, 50, 50, 1};
  cfg.precision = Precision::Float32;
  const auto set = make_training_set(Distribution::Sobol, InteriorShape::flat(1200), 200, fs,
                                     1);
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = adam_run(xavier_init(cfg, seed), cfg, set, fs, 500, 1e-3, 0);
    bool ok = true;
    double prev_mean = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w + 100 <= r.history.size(); w += 100) {
      double mean = 0.0;
      for (std::size_t i = w; i < w + 100; ++i) mean += r.history[i].loss;
      mean /= 100.0;
      ok = ok && mean <= prev_mean;
      prev_mean = mean;
    }
    good += ok ? 1 : 0;
  }
  CHECK(good >= 4);
}

TEST_CASE("loss history csv carries provenance and the schema") {
  const auto cfg = tiny_net();
  const auto set = tiny_foursines_set();
  const Problem fs = make_problem(ProblemId::FourSines);
  TrainSchedule sched;
  sched.adam_epochs = 3;
  const auto report = train_pinn(cfg, InitSpec::xavier(1), set, fs, sched);
  const auto path = std::filesystem::temp_directory_path() / "pinnmg_test_history.csv";
  write_loss_history_csv(report, path, "cmd=train seed=1");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# cmd=train seed=1");
  std::getline(in, line);
  CHECK(line == "epoch,phase,loss,wall_ms");
  std::getline(in, line);
  CHECK(line.starts_with("0,init,"));
  std::getline(in, line);
  CHECK(line.starts_with("1,adam,"));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
