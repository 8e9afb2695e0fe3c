#pragma once

// Fixed-size kernels for node-wise matrix algebra on EndField data.

#include <type_traits>

#include "nhym/fields.hpp"

namespace nhym::detail {

template <int R>
using Fixed = Eigen::Matrix<Complex, R, R>;

template <typename Fn>
void with_rank(int r, Fn&& fn) {
  switch (r) {
    case 1: fn(std::integral_constant<int, 1>{}); return;
    case 2: fn(std::integral_constant<int, 2>{}); return;
    case 3: fn(std::integral_constant<int, 3>{}); return;
    case 4: fn(std::integral_constant<int, 4>{}); return;
    default: throw GeometryError("rank out of supported range");
  }
}

template <int R>
Fixed<R> load(const EndField& f, Eigen::Index i) {
  return Eigen::Map<const Fixed<R>>(f.data().col(i).data());
}

template <int R>
Eigen::Map<Fixed<R>> slot(EndField& f, Eigen::Index i) {
  return Eigen::Map<Fixed<R>>(f.data().col(i).data());
}

inline void require_same_shape(const EndField& a, const EndField& b) {
  if (a.rank() != b.rank() || a.nodes() != b.nodes())
    throw GeometryError("end fields have mismatched rank or grid");
}

/// out(i) = fn(a(i), rest(i)...) with fixed-size matrices.
template <typename Fn, typename... Rest>
EndField zip_nodes(Fn&& fn, const EndField& a, const Rest&... rest) {
  (require_same_shape(a, rest), ...);
  EndField out(a.geometry(), a.rank());
  with_rank(a.rank(), [&](auto rc) {
    constexpr int R = decltype(rc)::value;
    for_each_node(a.nodes(), [&](Eigen::Index i) {
      slot<R>(out, i) = fn(load<R>(a, i), load<R>(rest, i)...);
    });
  });
  return out;
}

/// Real value per node: out[i] = fn(a(i), rest(i)...).
template <typename Fn, typename... Rest>
ScalarField reduce_nodes(Fn&& fn, const EndField& a, const Rest&... rest) {
  (require_same_shape(a, rest), ...);
  ScalarField out(a.geometry());
  with_rank(a.rank(), [&](auto rc) {
    constexpr int R = decltype(rc)::value;
    for_each_node(a.nodes(), [&](Eigen::Index i) { out[i] = fn(load<R>(a, i), load<R>(rest, i)...); });
  });
  return out;
}

/// H-inner product tr(a H^{-1} b^dagger H) on fixed-size blocks.
template <typename M>
Complex inner(const M& h, const M& h_inv, const M& a, const M& b) {
  return (a * h_inv * b.adjoint() * h).trace();
}

}  // namespace nhym::detail
