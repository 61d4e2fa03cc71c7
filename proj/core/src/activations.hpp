#pragma once

// Scalar activation functions with exact derivatives up to third order.
// Third derivatives are needed by the reverse pass through the Laplacian
// jets (the gradient of sigma'' terms).

#include <cmath>

#include "pinnmg/net.hpp"

namespace pinnmg::detail {

template <typename T>
struct Derivs4 {
  T v, d1, d2, d3;
};

template <typename T>
inline T stable_sigmoid(T u) {
  if (u >= T(0)) return T(1) / (T(1) + std::exp(-u));
  const T e = std::exp(u);
  return e / (T(1) + e);
}

template <typename T>
inline Derivs4<T> tanh_derivs(T u) {
  const T t = std::tanh(u);
  const T d1 = T(1) - t * t;
  const T d2 = T(-2) * t * d1;
  const T d3 = T(-2) * d1 * d1 - T(2) * t * d2;
  return {t, d1, d2, d3};
}

template <typename T>
inline Derivs4<T> sigmoid_derivs(T u) {
  const T s = stable_sigmoid(u);
  const T d1 = s * (T(1) - s);
  const T one_minus_2s = T(1) - T(2) * s;
  const T d2 = d1 * one_minus_2s;
  const T d3 = d2 * one_minus_2s - T(2) * d1 * d1;
  return {s, d1, d2, d3};
}

template <typename T>
inline Derivs4<T> swish_derivs(T u) {
  const auto s = sigmoid_derivs(u);
  return {u * s.v,
          s.v + u * s.d1,
          T(2) * s.d1 + u * s.d2,
          T(3) * s.d2 + u * s.d3};
}

template <typename T>
inline Derivs4<T> sine_derivs(T u) {
  const T sn = std::sin(u);
  const T cs = std::cos(u);
  return {sn, cs, -sn, -cs};
}

template <typename T>
inline Derivs4<T> relu_derivs(T u) {
  const T on = u > T(0) ? T(1) : T(0);
  return {u * on, on, T(0), T(0)};
}

template <typename T>
inline Derivs4<T> base_derivs(ActivationKind base, T u) {
  switch (base) {
    case ActivationKind::Tanh: return tanh_derivs(u);
    case ActivationKind::Sigmoid: return sigmoid_derivs(u);
    case ActivationKind::Swish: return swish_derivs(u);
    case ActivationKind::Sine: return sine_derivs(u);
    default: return relu_derivs(u);
  }
}

}  // namespace pinnmg::detail
