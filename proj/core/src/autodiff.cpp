#include "pinnmg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

#include "packed_net.hpp"

namespace pinnmg {

namespace {

using detail::kBlock;

template <typename T>
class EngineT {
 public:
  EngineT(const NetworkConfig& config, const TrainingSet& set, const Problem& problem,
          double boundary_weight)
      : config_(config),
        net_(detail::PackedNet<T>::make(config)),
        weight_(boundary_weight) {
    config_.validate();
    if (!is_smooth(config_.activation)) {
      throw std::invalid_argument(
          std::string("activation '") + to_string(config_.activation) +
          "' has no second derivative; the residual loss requires a smooth activation");
    }
    if (set.interior.empty()) {
      throw std::invalid_argument("training set has an empty interior");
    }
    interior_ = set.interior;
    source_.reserve(interior_.size());
    for (const Point& p : interior_) source_.push_back(eval_source(problem, p.x, p.y));
    boundary_.reserve(set.boundary.size());
    dirichlet_.reserve(set.boundary.size());
    for (const BoundaryPoint& bp : set.boundary) {
      boundary_.push_back(bp.p);
      dirichlet_.push_back(bp.value);
    }
    n_interior_blocks_ = (interior_.size() + kReductionBlock - 1) / kReductionBlock;
    n_boundary_blocks_ = (boundary_.size() + kReductionBlock - 1) / kReductionBlock;
    interior_sq_.resize(interior_.size());
    boundary_sq_.resize(boundary_.size());
    const std::size_t workers = worker_thread_count();
    workspaces_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) workspaces_.emplace_back(net_.sizes);
    grad_rows_.resize((n_interior_blocks_ + n_boundary_blocks_) * net_.layout.total);
  }

  std::size_t parameter_count() const { return net_.layout.total; }
  const NetworkConfig& config() const { return config_; }

  LossBreakdown loss(const Parameters& params) { return run(params, nullptr); }

  LossBreakdown loss_gradient(const Parameters& params, std::span<double> grad) {
    if (grad.size() != net_.layout.total) {
      throw std::invalid_argument("gradient span does not match the parameter count");
    }
    return run(params, grad.data());
  }

 private:
  LossBreakdown run(const Parameters& params, double* grad) {
    if (params.size() != net_.layout.total) {
      throw std::invalid_argument("parameter vector does not match the network layout");
    }
    net_.set_params(params);
    const std::size_t n_blocks = n_interior_blocks_ + n_boundary_blocks_;
    const T interior_coeff = static_cast<T>(2.0 / static_cast<double>(interior_.size()));
    const T boundary_coeff =
        boundary_.empty()
            ? T(0)
            : static_cast<T>(2.0 * weight_ / static_cast<double>(boundary_.size()));

    parallel_blocks(n_blocks, [&](std::size_t blk, std::size_t worker) {
      auto& ws = workspaces_[worker];
      T* grad_row = grad ? grad_rows_.data() + blk * net_.layout.total : nullptr;
      if (blk < n_interior_blocks_) {
        const std::size_t lo = blk * kReductionBlock;
        const int b = static_cast<int>(std::min(kReductionBlock, interior_.size() - lo));
        detail::forward_block_jets(net_, interior_.data() + lo, b, ws);
        const T* out = ws.pre.back().data();
        T seed_v[kBlock];
        T seed_lap[kBlock];
        for (int p = 0; p < b; ++p) {
          const T lap = out[3 * b + p] + out[4 * b + p];
          const T r = lap - static_cast<T>(source_[lo + p]);
          interior_sq_[lo + p] = static_cast<double>(r) * static_cast<double>(r);
          seed_v[p] = T(0);
          seed_lap[p] = interior_coeff * r;
        }
        if (grad) detail::backward_block_jets(net_, b, ws, seed_v, seed_lap, grad_row);
      } else {
        const std::size_t lo = (blk - n_interior_blocks_) * kReductionBlock;
        const int b = static_cast<int>(std::min(kReductionBlock, boundary_.size() - lo));
        detail::forward_block_value(net_, boundary_.data() + lo, b, ws);
        const T* out = ws.pre.back().data();
        T seed_v[kBlock];
        for (int p = 0; p < b; ++p) {
          const T d = out[p] - static_cast<T>(dirichlet_[lo + p]);
          boundary_sq_[lo + p] = static_cast<double>(d) * static_cast<double>(d);
          seed_v[p] = boundary_coeff * d;
        }
        if (grad) detail::backward_block_value(net_, b, ws, seed_v, grad_row);
      }
    });

    if (grad) {
      // Interior and boundary contributions are reduced in separate trees
      // (mirroring the two mean terms of the loss), then added.
      combine_blocks(0, n_interior_blocks_, grad, 0);
      if (n_boundary_blocks_ > 0) {
        if (boundary_grad_.size() != net_.layout.total) {
          boundary_grad_.resize(net_.layout.total);
        }
        combine_blocks(n_interior_blocks_, n_blocks, boundary_grad_.data(), 0);
        for (std::size_t i = 0; i < net_.layout.total; ++i) grad[i] += boundary_grad_[i];
      }
    }

    LossBreakdown breakdown;
    breakdown.n_interior = interior_.size();
    breakdown.n_boundary = boundary_.size();
    breakdown.boundary_weight = weight_;
    breakdown.interior_mse = sorted_mean(interior_sq_);
    breakdown.boundary_mse = boundary_sq_.empty() ? 0.0 : sorted_mean(boundary_sq_);
    breakdown.total = breakdown.interior_mse + weight_ * breakdown.boundary_mse;
    return breakdown;
  }

  // Canonical reduction: per-point terms sorted, then pairwise-summed. The
  // value is invariant under permutations of the training points.
  double sorted_mean(const std::vector<double>& sq) {
    scratch_.assign(sq.begin(), sq.end());
    std::sort(scratch_.begin(), scratch_.end());
    return pairwise_sum(scratch_) / static_cast<double>(sq.size());
  }

  // Pairwise tree over block gradient rows, splitting ranges at their
  // midpoint (same shape as pairwise_sum).
  void combine_blocks(std::size_t lo, std::size_t hi, double* out, std::size_t depth) {
    const std::size_t n = net_.layout.total;
    if (hi - lo == 1) {
      const T* row = grad_rows_.data() + lo * n;
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(row[i]);
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    combine_blocks(lo, mid, out, depth + 1);
    if (arena_.size() <= depth) arena_.resize(depth + 1);
    if (arena_[depth].size() != n) arena_[depth].resize(n);
    double* tmp = arena_[depth].data();
    combine_blocks(mid, hi, tmp, depth + 1);
    for (std::size_t i = 0; i < n; ++i) out[i] += tmp[i];
  }

  NetworkConfig config_;
  detail::PackedNet<T> net_;
  double weight_;
  std::vector<Point> interior_;
  std::vector<Point> boundary_;
  std::vector<double> source_;
  std::vector<double> dirichlet_;
  std::size_t n_interior_blocks_ = 0;
  std::size_t n_boundary_blocks_ = 0;
  std::vector<double> interior_sq_;
  std::vector<double> boundary_sq_;
  std::vector<double> scratch_;
  std::vector<detail::Workspace<T>> workspaces_;
  std::vector<T> grad_rows_;
  std::vector<double> boundary_grad_;
  std::vector<std::vector<double>> arena_;
};

}  // namespace

struct ResidualEvaluator::Impl {
  std::variant<EngineT<float>, EngineT<double>> engine;

  template <typename F>
  decltype(auto) visit(F&& f) {
    return std::visit(std::forward<F>(f), engine);
  }
};

ResidualEvaluator::ResidualEvaluator(const NetworkConfig& config, const TrainingSet& set,
                                     const Problem& problem, double boundary_weight)
    : impl_(new Impl{
          config.precision == Precision::Float32
              ? decltype(Impl::engine){std::in_place_type<EngineT<float>>, config, set, problem,
                                       boundary_weight}
              : decltype(Impl::engine){std::in_place_type<EngineT<double>>, config, set,
                                       problem, boundary_weight}}) {}

ResidualEvaluator::~ResidualEvaluator() = default;
ResidualEvaluator::ResidualEvaluator(ResidualEvaluator&&) noexcept = default;
ResidualEvaluator& ResidualEvaluator::operator=(ResidualEvaluator&&) noexcept = default;

LossBreakdown ResidualEvaluator::loss(const Parameters& params) const {
  return impl_->visit([&](auto& e) { return e.loss(params); });
}

LossBreakdown ResidualEvaluator::loss_gradient(const Parameters& params,
                                               std::span<double> grad) const {
  return impl_->visit([&](auto& e) { return e.loss_gradient(params, grad); });
}

std::size_t ResidualEvaluator::parameter_count() const {
  return impl_->visit([](auto& e) { return e.parameter_count(); });
}

const NetworkConfig& ResidualEvaluator::config() const {
  const Impl* impl = impl_.get();
  return std::visit([](auto& e) -> const NetworkConfig& { return e.config(); },
                    const_cast<Impl*>(impl)->engine);
}

ValueAndLaplacian forward_laplacian(const Parameters& params, const NetworkConfig& config,
                                    Point point) {
  config.validate();
  if (!is_smooth(config.activation)) {
    throw std::invalid_argument(
        std::string("activation '") + to_string(config.activation) +
        "' has no second derivative; forward_laplacian requires a smooth activation");
  }
  if (params.size() != config.parameter_count()) {
    throw std::invalid_argument("parameter vector does not match the network layout");
  }
  auto eval = [&]<typename T>() {
    auto net = detail::PackedNet<T>::make(config);
    net.set_params(params);
    detail::Workspace<T> ws(net.sizes);
    detail::forward_block_jets(net, &point, 1, ws);
    const T* out = ws.pre.back().data();
    return ValueAndLaplacian{static_cast<double>(out[0]),
                             static_cast<double>(out[3]) + static_cast<double>(out[4])};
  };
  if (config.precision == Precision::Float32) return eval.operator()<float>();
  return eval.operator()<double>();
}

LossBreakdown residual_loss(const Parameters& params, const NetworkConfig& config,
                            const TrainingSet& set, const Problem& problem,
                            double boundary_weight) {
  ResidualEvaluator eval(config, set, problem, boundary_weight);
  return eval.loss(params);
}

LossBreakdown loss_gradient(const Parameters& params, const NetworkConfig& config,
                            const TrainingSet& set, const Problem& problem,
                            std::span<double> grad, double boundary_weight) {
  ResidualEvaluator eval(config, set, problem, boundary_weight);
  return eval.loss_gradient(params, grad);
}

double fd_check(const Parameters& params, const NetworkConfig& config, const TrainingSet& set,
                const Problem& problem, double h, double boundary_weight) {
  NetworkConfig cfg64 = config;
  cfg64.precision = Precision::Float64;
  ResidualEvaluator eval(cfg64, set, problem, boundary_weight);
  std::vector<double> grad(params.size());
  eval.loss_gradient(params, grad);

  Parameters probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double step = h * (1.0 + std::abs(params[i]));
    probe[i] = params[i] + step;
    const double up = eval.loss(probe).total;
    probe[i] = params[i] - step;
    const double down = eval.loss(probe).total;
    probe[i] = params[i];
    const double fd = (up - down) / (2.0 * step);
    const double rel = std::abs(grad[i] - fd) / std::max(std::abs(grad[i]), 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace pinnmg
