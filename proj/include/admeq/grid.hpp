#ifndef ADMEQ_GRID_HPP_
#define ADMEQ_GRID_HPP_

#include "admeq/core.hpp"
#include "admeq/linear_operator.hpp"

namespace admeq {

// Discrete gradient / divergence on an H x W grid, forward differences.
// Images are flattened row-major (pixel (i, j) at i*W + j); the gradient
// stacks one 2-vector per pixel, (horizontal, vertical) interleaved at
// (2p, 2p + 1).
//
// div2d is wired as the exact negative adjoint of grad2d: both directions of
// both operators call the same two index loops, so  grad2d.adjoint_apply(v)
// and  -div2d.apply(v)  are bitwise identical.

enum class Boundary {
  Periodic,  // wrap-around differences; enables the Fourier diagonalization
  Neumann    // replicate edge (zero difference across the border)
};

namespace grid_detail {

inline Vector grad_apply(const Vector& x, Index h, Index w, Boundary bc) {
  Vector out(2 * h * w);
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      const Index p = i * w + j;
      double dx = 0.0, dy = 0.0;
      if (j + 1 < w)
        dx = x[p + 1] - x[p];
      else if (bc == Boundary::Periodic)
        dx = x[i * w] - x[p];
      if (i + 1 < h)
        dy = x[p + w] - x[p];
      else if (bc == Boundary::Periodic)
        dy = x[j] - x[p];
      out[2 * p] = dx;
      out[2 * p + 1] = dy;
    }
  }
  return out;
}

inline Vector grad_adjoint(const Vector& v, Index h, Index w, Boundary bc) {
  Vector out = Vector::Zero(h * w);
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      const Index p = i * w + j;
      const double dx = v[2 * p];
      const double dy = v[2 * p + 1];
      if (j + 1 < w) {
        out[p + 1] += dx;
        out[p] -= dx;
      } else if (bc == Boundary::Periodic) {
        out[i * w] += dx;
        out[p] -= dx;
      }
      if (i + 1 < h) {
        out[p + w] += dy;
        out[p] -= dy;
      } else if (bc == Boundary::Periodic) {
        out[j] += dy;
        out[p] -= dy;
      }
    }
  }
  return out;
}

}  // namespace grid_detail

inline LinearOperator grad2d(Index h, Index w, Boundary bc = Boundary::Periodic) {
  require(h >= 2 && w >= 2, "grad2d: grid must be at least 2 x 2");
  return LinearOperator(
      2 * h * w, h * w,
      [h, w, bc](const Vector& x) { return grid_detail::grad_apply(x, h, w, bc); },
      [h, w, bc](const Vector& v) { return grid_detail::grad_adjoint(v, h, w, bc); });
}

inline LinearOperator div2d(Index h, Index w, Boundary bc = Boundary::Periodic) {
  require(h >= 2 && w >= 2, "div2d: grid must be at least 2 x 2");
  return LinearOperator(
      h * w, 2 * h * w,
      [h, w, bc](const Vector& v) -> Vector { return -grid_detail::grad_adjoint(v, h, w, bc); },
      [h, w, bc](const Vector& x) -> Vector { return -grid_detail::grad_apply(x, h, w, bc); });
}

}  // namespace admeq

#endif  // ADMEQ_GRID_HPP_
