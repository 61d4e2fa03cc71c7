#pragma once

// Internal evaluation engine. A PackedNet keeps a casted copy of the flat
// parameter vector; blocks of points are propagated with all jet slots of a
// unit stored as contiguous rows ([v | d/dx | d/dy | d2/dx2 | d2/dy2], each
// kReductionBlock wide), so every affine layer is a small GEMM whose inner
// loop vectorizes over points.

#include <algorithm>
#include <cassert>
#include <vector>

#include "activations.hpp"
#include "pinnmg/common.hpp"
#include "pinnmg/net.hpp"

namespace pinnmg::detail {

inline constexpr int kBlock = static_cast<int>(kReductionBlock);
inline constexpr int kJetSlots = 5;

template <typename T>
struct PackedNet {
  std::vector<int> sizes;
  ActivationKind base = ActivationKind::Tanh;
  bool adaptive = false;
  int factor = 0;
  ParameterLayout layout;
  std::vector<T> data;

  static PackedNet make(const NetworkConfig& config) {
    PackedNet net;
    net.sizes = config.layer_sizes;
    net.base = base_kind(config.activation);
    net.adaptive = is_adaptive(config.activation);
    net.factor = config.laaf_factor;
    net.layout = ParameterLayout::of(config);
    net.data.resize(net.layout.total);
    return net;
  }

  void set_params(const Parameters& p) {
    assert(p.size() == layout.total);
    for (std::size_t i = 0; i < p.size(); ++i) data[i] = static_cast<T>(p[i]);
  }

  int affine_layers() const { return static_cast<int>(sizes.size()) - 1; }
  const T* weights(int l) const { return data.data() + layout.weight_offset[l]; }
  const T* biases(int l) const { return data.data() + layout.bias_offset[l]; }
  T scale(int hidden) const {
    return adaptive ? static_cast<T>(factor) * data[layout.slope_offset + hidden] : T(1);
  }
};

// Z[out][cols] = W[out][in] * X[in][cols], bias added to columns [0, bias_cols).
template <typename T>
inline void affine_forward(const T* __restrict__ W, const T* __restrict__ bias, int in,
                           int out, const T* __restrict__ X, T* __restrict__ Z, int cols,
                           int bias_cols) {
  for (int j = 0; j < out; ++j) {
    T* __restrict__ zrow = Z + static_cast<std::size_t>(j) * cols;
    const T bj = bias[j];
    for (int c = 0; c < bias_cols; ++c) zrow[c] = bj;
    for (int c = bias_cols; c < cols; ++c) zrow[c] = T(0);
    const T* __restrict__ wrow = W + static_cast<std::size_t>(j) * in;
    int k = 0;
    for (; k + 4 <= in; k += 4) {
      const T w0 = wrow[k], w1 = wrow[k + 1], w2 = wrow[k + 2], w3 = wrow[k + 3];
      const T* __restrict__ x0 = X + static_cast<std::size_t>(k) * cols;
      const T* __restrict__ x1 = x0 + cols;
      const T* __restrict__ x2 = x1 + cols;
      const T* __restrict__ x3 = x2 + cols;
      for (int c = 0; c < cols; ++c) {
        zrow[c] += w0 * x0[c] + w1 * x1[c] + w2 * x2[c] + w3 * x3[c];
      }
    }
    for (; k < in; ++k) {
      const T w = wrow[k];
      const T* __restrict__ xrow = X + static_cast<std::size_t>(k) * cols;
      for (int c = 0; c < cols; ++c) zrow[c] += w * xrow[c];
    }
  }
}

// Xbar[in][cols] = W^T * Zbar[out][cols].
template <typename T>
inline void affine_backward_input(const T* __restrict__ W, int in, int out,
                                  const T* __restrict__ Zbar, T* __restrict__ Xbar,
                                  int cols) {
  for (int k = 0; k < in; ++k) {
    T* xrow = Xbar + static_cast<std::size_t>(k) * cols;
    std::fill(xrow, xrow + cols, T(0));
  }
  for (int j = 0; j < out; ++j) {
    const T* __restrict__ zrow = Zbar + static_cast<std::size_t>(j) * cols;
    const T* __restrict__ wrow = W + static_cast<std::size_t>(j) * in;
    for (int k = 0; k < in; ++k) {
      const T w = wrow[k];
      T* __restrict__ xrow = Xbar + static_cast<std::size_t>(k) * cols;
      for (int c = 0; c < cols; ++c) xrow[c] += w * zrow[c];
    }
  }
}

inline constexpr int kDotLanes = 16;

// Fixed-lane dot product: cols split over kDotLanes independent partial
// accumulators (vectorizable without reassociation), combined in a fixed
// order. Part of the deterministic-reduction contract.
template <typename T>
inline T lane_dot(const T* __restrict__ a, const T* __restrict__ b, int cols) {
  T lanes[kDotLanes] = {};
  int c = 0;
  for (; c + kDotLanes <= cols; c += kDotLanes) {
    for (int u = 0; u < kDotLanes; ++u) lanes[u] += a[c + u] * b[c + u];
  }
  for (int u = 0; c + u < cols; ++u) lanes[u] += a[c + u] * b[c + u];
  T acc = T(0);
  for (int u = 0; u < kDotLanes; ++u) acc += lanes[u];
  return acc;
}

template <typename T>
inline T lane_sum(const T* __restrict__ a, int cols) {
  T lanes[kDotLanes] = {};
  int c = 0;
  for (; c + kDotLanes <= cols; c += kDotLanes) {
    for (int u = 0; u < kDotLanes; ++u) lanes[u] += a[c + u];
  }
  for (int u = 0; c + u < cols; ++u) lanes[u] += a[c + u];
  T acc = T(0);
  for (int u = 0; u < kDotLanes; ++u) acc += lanes[u];
  return acc;
}

// Wbar[j][k] = sum_c Zbar[j][c] * X[k][c]; bbar[j] = sum of value columns.
// Assigns (single writer per block), no accumulation across calls.
template <typename T>
inline void affine_backward_params(const T* __restrict__ Zbar, const T* __restrict__ X,
                                   int in, int out, int cols, int bias_cols,
                                   T* __restrict__ Wbar, T* __restrict__ bbar) {
  for (int j = 0; j < out; ++j) {
    const T* __restrict__ zrow = Zbar + static_cast<std::size_t>(j) * cols;
    T* __restrict__ wrow = Wbar + static_cast<std::size_t>(j) * in;
    for (int k = 0; k < in; ++k) {
      wrow[k] = lane_dot(zrow, X + static_cast<std::size_t>(k) * cols, cols);
    }
    bbar[j] = lane_sum(zrow, bias_cols);
  }
}

// Jet transfer through sigma(s*z): value, first and second derivative slots.
// phi1..phi3 cache sigma'(u), sigma''(u), sigma'''(u) for the reverse pass.
template <typename T>
inline void act_forward_jets(ActivationKind base, T s, int width, int b, const T* Z, T* A,
                             T* phi1, T* phi2, T* phi3) {
  const int cols = kJetSlots * b;
  for (int j = 0; j < width; ++j) {
    const T* z = Z + static_cast<std::size_t>(j) * cols;
    T* a = A + static_cast<std::size_t>(j) * cols;
    T* p1 = phi1 + static_cast<std::size_t>(j) * b;
    T* p2 = phi2 + static_cast<std::size_t>(j) * b;
    T* p3 = phi3 + static_cast<std::size_t>(j) * b;
    for (int p = 0; p < b; ++p) {
      const auto d = base_derivs(base, s * z[p]);
      p1[p] = d.d1;
      p2[p] = d.d2;
      p3[p] = d.d3;
      const T zx = z[b + p], zy = z[2 * b + p], zxx = z[3 * b + p], zyy = z[4 * b + p];
      const T sd1 = s * d.d1;
      const T s2d2 = s * s * d.d2;
      a[p] = d.v;
      a[b + p] = sd1 * zx;
      a[2 * b + p] = sd1 * zy;
      a[3 * b + p] = s2d2 * zx * zx + sd1 * zxx;
      a[4 * b + p] = s2d2 * zy * zy + sd1 * zyy;
    }
  }
}

template <typename T>
inline void act_forward_value(ActivationKind base, T s, int width, int b, const T* Z, T* A,
                              T* phi1) {
  for (int j = 0; j < width; ++j) {
    const T* z = Z + static_cast<std::size_t>(j) * b;
    T* a = A + static_cast<std::size_t>(j) * b;
    T* p1 = phi1 + static_cast<std::size_t>(j) * b;
    for (int p = 0; p < b; ++p) {
      const auto d = base_derivs(base, s * z[p]);
      a[p] = d.v;
      p1[p] = d.d1;
    }
  }
}

// Adjoint of act_forward_jets. Bar is transformed in place from the
// post-activation adjoint to the pre-activation adjoint. Returns the
// adjoint of the pre-scale s accumulated over the block (sequential order).
template <typename T>
inline T act_backward_jets(T s, int width, int b, const T* Z, const T* phi1, const T* phi2,
                           const T* phi3, T* Bar, bool need_slope) {
  const int cols = kJetSlots * b;
  const T s2 = s * s;
  const T s3 = s2 * s;
  T slope_acc = T(0);
  for (int j = 0; j < width; ++j) {
    const T* z = Z + static_cast<std::size_t>(j) * cols;
    const T* p1 = phi1 + static_cast<std::size_t>(j) * b;
    const T* p2 = phi2 + static_cast<std::size_t>(j) * b;
    const T* p3 = phi3 + static_cast<std::size_t>(j) * b;
    T* bar = Bar + static_cast<std::size_t>(j) * cols;
    for (int p = 0; p < b; ++p) {
      const T zv = z[p], zx = z[b + p], zy = z[2 * b + p], zxx = z[3 * b + p],
              zyy = z[4 * b + p];
      const T f1 = p1[p], f2 = p2[p], f3 = p3[p];
      const T av = bar[p], ax = bar[b + p], ay = bar[2 * b + p], axx = bar[3 * b + p],
              ayy = bar[4 * b + p];
      bar[p] = av * s * f1 + (ax * zx + ay * zy) * s2 * f2 +
               axx * (s3 * f3 * zx * zx + s2 * f2 * zxx) +
               ayy * (s3 * f3 * zy * zy + s2 * f2 * zyy);
      bar[b + p] = ax * s * f1 + axx * T(2) * s2 * f2 * zx;
      bar[2 * b + p] = ay * s * f1 + ayy * T(2) * s2 * f2 * zy;
      bar[3 * b + p] = axx * s * f1;
      bar[4 * b + p] = ayy * s * f1;
      if (need_slope) {
        const T g = f1 + s * f2 * zv;
        slope_acc += av * f1 * zv + (ax * zx + ay * zy) * g +
                     axx * (T(2) * s * f2 * zx * zx + s2 * f3 * zv * zx * zx + f1 * zxx +
                            s * f2 * zv * zxx) +
                     ayy * (T(2) * s * f2 * zy * zy + s2 * f3 * zv * zy * zy + f1 * zyy +
                            s * f2 * zv * zyy);
      }
    }
  }
  return slope_acc;
}

template <typename T>
inline T act_backward_value(T s, int width, int b, const T* Z, const T* phi1, T* Bar,
                            bool need_slope) {
  T slope_acc = T(0);
  for (int j = 0; j < width; ++j) {
    const T* z = Z + static_cast<std::size_t>(j) * b;
    const T* p1 = phi1 + static_cast<std::size_t>(j) * b;
    T* bar = Bar + static_cast<std::size_t>(j) * b;
    for (int p = 0; p < b; ++p) {
      const T av = bar[p];
      bar[p] = av * s * p1[p];
      if (need_slope) slope_acc += av * p1[p] * z[p];
    }
  }
  return slope_acc;
}

// Scratch for one block. Buffers are sized for the jets layout; value-only
// passes reuse them with the narrower stride.
template <typename T>
struct Workspace {
  std::vector<std::vector<T>> acts;  // acts[0] = input jets, acts[l] = post-activation
  std::vector<std::vector<T>> pre;   // pre[l] = affine output of layer l
  std::vector<std::vector<T>> phi1, phi2, phi3;
  std::vector<T> bar;  // adjoint buffer, max width

  explicit Workspace(const std::vector<int>& sizes) {
    const int layers = static_cast<int>(sizes.size()) - 1;
    const int max_cols = kJetSlots * kBlock;
    acts.resize(layers);
    pre.resize(layers);
    for (int l = 0; l < layers; ++l) {
      acts[l].resize(static_cast<std::size_t>(sizes[l]) * max_cols);
      pre[l].resize(static_cast<std::size_t>(sizes[l + 1]) * max_cols);
    }
    phi1.resize(layers - 1);
    phi2.resize(layers - 1);
    phi3.resize(layers - 1);
    for (int l = 0; l + 1 < layers; ++l) {
      phi1[l].resize(static_cast<std::size_t>(sizes[l + 1]) * kBlock);
      phi2[l].resize(static_cast<std::size_t>(sizes[l + 1]) * kBlock);
      phi3[l].resize(static_cast<std::size_t>(sizes[l + 1]) * kBlock);
    }
    const int max_width = *std::max_element(sizes.begin(), sizes.end());
    bar.resize(static_cast<std::size_t>(max_width) * max_cols);
  }
};

// Jet forward pass over a block of b <= kBlock points. Leaves the output
// affine layer's jets in ws.pre.back().
template <typename T>
inline void forward_block_jets(const PackedNet<T>& net, const Point* pts, int b,
                               Workspace<T>& ws) {
  const int cols = kJetSlots * b;
  T* in = ws.acts[0].data();
  for (int p = 0; p < b; ++p) {
    in[p] = static_cast<T>(pts[p].x);
    in[b + p] = T(1);
    in[2 * b + p] = T(0);
    in[3 * b + p] = T(0);
    in[4 * b + p] = T(0);
    in[cols + p] = static_cast<T>(pts[p].y);
    in[cols + b + p] = T(0);
    in[cols + 2 * b + p] = T(1);
    in[cols + 3 * b + p] = T(0);
    in[cols + 4 * b + p] = T(0);
  }
  const int layers = net.affine_layers();
  for (int l = 0; l < layers; ++l) {
    const T* x = l == 0 ? ws.acts[0].data() : ws.acts[l].data();
    affine_forward(net.weights(l), net.biases(l), net.sizes[l], net.sizes[l + 1], x,
                   ws.pre[l].data(), cols, b);
    if (l + 1 < layers) {
      act_forward_jets(net.base, net.scale(l), net.sizes[l + 1], b, ws.pre[l].data(),
                       ws.acts[l + 1].data(), ws.phi1[l].data(), ws.phi2[l].data(),
                       ws.phi3[l].data());
    }
  }
}

template <typename T>
inline void forward_block_value(const PackedNet<T>& net, const Point* pts, int b,
                                Workspace<T>& ws) {
  T* in = ws.acts[0].data();
  for (int p = 0; p < b; ++p) {
    in[p] = static_cast<T>(pts[p].x);
    in[b + p] = static_cast<T>(pts[p].y);
  }
  const int layers = net.affine_layers();
  for (int l = 0; l < layers; ++l) {
    const T* x = l == 0 ? ws.acts[0].data() : ws.acts[l].data();
    affine_forward(net.weights(l), net.biases(l), net.sizes[l], net.sizes[l + 1], x,
                   ws.pre[l].data(), b, b);
    if (l + 1 < layers) {
      act_forward_value(net.base, net.scale(l), net.sizes[l + 1], b, ws.pre[l].data(),
                        ws.acts[l + 1].data(), ws.phi1[l].data());
    }
  }
}

// Reverse pass after forward_block_jets. seed_value / seed_lap are the
// adjoints of the output unit's value and Laplacian for each point. The
// block's parameter gradient is assigned into grad_row (layout order).
template <typename T>
inline void backward_block_jets(const PackedNet<T>& net, int b, Workspace<T>& ws,
                                const T* seed_value, const T* seed_lap, T* grad_row) {
  const int cols = kJetSlots * b;
  const int layers = net.affine_layers();
  T* bar = ws.bar.data();
  for (int p = 0; p < b; ++p) {
    bar[p] = seed_value[p];
    bar[b + p] = T(0);
    bar[2 * b + p] = T(0);
    bar[3 * b + p] = seed_lap[p];
    bar[4 * b + p] = seed_lap[p];
  }
  for (int l = layers - 1; l >= 0; --l) {
    const T* x = l == 0 ? ws.acts[0].data() : ws.acts[l].data();
    affine_backward_params(bar, x, net.sizes[l], net.sizes[l + 1], cols, b,
                           grad_row + net.layout.weight_offset[l],
                           grad_row + net.layout.bias_offset[l]);
    if (l > 0) {
      // Reuse the previous layer's post-activation buffer as the adjoint
      // carrier: its contents are consumed by the param grad of layer l-1
      // only via ws.acts[l-1], not ws.acts[l].
      T* next_bar = ws.acts[l].data();
      affine_backward_input(net.weights(l), net.sizes[l], net.sizes[l + 1], bar, next_bar,
                            cols);
      const T slope_adj =
          act_backward_jets(net.scale(l - 1), net.sizes[l], b, ws.pre[l - 1].data(),
                            ws.phi1[l - 1].data(), ws.phi2[l - 1].data(),
                            ws.phi3[l - 1].data(), next_bar, net.adaptive);
      if (net.adaptive) {
        grad_row[net.layout.slope_offset + (l - 1)] = static_cast<T>(net.factor) * slope_adj;
      }
      bar = next_bar;
    }
  }
}

template <typename T>
inline void backward_block_value(const PackedNet<T>& net, int b, Workspace<T>& ws,
                                 const T* seed_value, T* grad_row) {
  const int layers = net.affine_layers();
  T* bar = ws.bar.data();
  std::copy(seed_value, seed_value + b, bar);
  for (int l = layers - 1; l >= 0; --l) {
    const T* x = l == 0 ? ws.acts[0].data() : ws.acts[l].data();
    affine_backward_params(bar, x, net.sizes[l], net.sizes[l + 1], b, b,
                           grad_row + net.layout.weight_offset[l],
                           grad_row + net.layout.bias_offset[l]);
    if (l > 0) {
      T* next_bar = ws.acts[l].data();
      affine_backward_input(net.weights(l), net.sizes[l], net.sizes[l + 1], bar, next_bar, b);
      const T slope_adj =
          act_backward_value(net.scale(l - 1), net.sizes[l], b, ws.pre[l - 1].data(),
                             ws.phi1[l - 1].data(), next_bar, net.adaptive);
      if (net.adaptive) {
        grad_row[net.layout.slope_offset + (l - 1)] = static_cast<T>(net.factor) * slope_adj;
      }
      bar = next_bar;
    }
  }
}

}  // namespace pinnmg::detail
