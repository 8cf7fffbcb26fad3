#ifndef ADMEQ_INSTANCES_TV_HPP_
#define ADMEQ_INSTANCES_TV_HPP_

#include "admeq/formulations.hpp"
#include "admeq/grid.hpp"
#include "admeq/rng.hpp"
#include "admeq/solvers.hpp"

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace admeq {

// Total variation denoising on an H x W grid:
//   min ||y||_{2,1} + alpha/2 ||x - b||^2   s.t.  y - grad x = 0,
// with the dual split
//   min 1/(2 alpha) ||div u + alpha b||^2 + i_{||v||_{2,inf} <= 1}(v),  u - v = 0.
//
// The linear updates solve (alpha I + 1/lambda grad* grad) and
// (lambda I + 1/alpha div* div) systems.  Two interchangeable paths are
// provided: a cached dense Cholesky, and (under periodic boundary) the
// Fourier diagonalization of the translation-invariant difference operators.
enum class TvSolvePath { Direct, Fft };

namespace tv_detail {

using Complexd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// Per-frequency symbols of the forward-difference operators on a periodic
// H x W grid, plus 2-D FFT helpers (rows then columns).
struct Fourier {
  Index h, w;
  CMatrix dx, dy;          // symbols e^{2 pi i q/W} - 1, e^{2 pi i p/H} - 1
  Eigen::ArrayXXd dsq;     // |dx|^2 + |dy|^2

  Fourier(Index h_, Index w_) : h(h_), w(w_), dx(h_, w_), dy(h_, w_), dsq(h_, w_) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (Index p = 0; p < h; ++p) {
      for (Index q = 0; q < w; ++q) {
        dx(p, q) = std::polar(1.0, two_pi * static_cast<double>(q) / static_cast<double>(w)) -
                   Complexd(1.0, 0.0);
        dy(p, q) = std::polar(1.0, two_pi * static_cast<double>(p) / static_cast<double>(h)) -
                   Complexd(1.0, 0.0);
        dsq(p, q) = std::norm(dx(p, q)) + std::norm(dy(p, q));
      }
    }
  }

  CMatrix fft2(const CMatrix& in, bool inverse) const {
    Eigen::FFT<double> fft;
    CMatrix tmp(h, w);
    Eigen::VectorXcd line_in, line_out;
    for (Index i = 0; i < h; ++i) {
      line_in = in.row(i).transpose();
      line_out.resize(w);
      if (inverse)
        fft.inv(line_out, line_in);
      else
        fft.fwd(line_out, line_in);
      tmp.row(i) = line_out.transpose();
    }
    CMatrix out(h, w);
    for (Index j = 0; j < w; ++j) {
      line_in = tmp.col(j);
      line_out.resize(h);
      if (inverse)
        fft.inv(line_out, line_in);
      else
        fft.fwd(line_out, line_in);
      out.col(j) = line_out;
    }
    return out;
  }

  CMatrix plane_from(const Vector& x) const {
    CMatrix m(h, w);
    for (Index p = 0; p < h; ++p)
      for (Index q = 0; q < w; ++q) m(p, q) = x[p * w + q];
    return m;
  }

  Vector plane_to(const CMatrix& m) const {
    Vector x(h * w);
    for (Index p = 0; p < h; ++p)
      for (Index q = 0; q < w; ++q) x[p * w + q] = m(p, q).real();
    return x;
  }

  // (a I + li grad* grad)^-1 rhs: pointwise division by a + li |d|^2.
  Vector solve_image_system(const Vector& rhs, double a, double li) const {
    CMatrix f = fft2(plane_from(rhs), false);
    for (Index p = 0; p < h; ++p)
      for (Index q = 0; q < w; ++q) f(p, q) /= (a + li * dsq(p, q));
    return plane_to(fft2(f, true));
  }

  // (lam I + c d d^H)^-1 per frequency via Sherman-Morrison, applied to the
  // interleaved field rhs; c = 1/alpha.
  Vector solve_field_system(const Vector& rhs, double lam, double c) const {
    Vector rx(h * w), ry(h * w);
    for (Index p = 0; p < h * w; ++p) {
      rx[p] = rhs[2 * p];
      ry[p] = rhs[2 * p + 1];
    }
    CMatrix fx = fft2(plane_from(rx), false);
    CMatrix fy = fft2(plane_from(ry), false);
    for (Index p = 0; p < h; ++p) {
      for (Index q = 0; q < w; ++q) {
        const Complexd a = dx(p, q), b = dy(p, q);
        const Complexd inner = std::conj(a) * fx(p, q) + std::conj(b) * fy(p, q);
        const Complexd scale = c * inner / (lam * (lam + c * dsq(p, q)));
        fx(p, q) = fx(p, q) / lam - a * scale;
        fy(p, q) = fy(p, q) / lam - b * scale;
      }
    }
    const Vector ox = plane_to(fft2(fx, true));
    const Vector oy = plane_to(fft2(fy, true));
    Vector out(2 * h * w);
    for (Index p = 0; p < h * w; ++p) {
      out[2 * p] = ox[p];
      out[2 * p + 1] = oy[p];
    }
    return out;
  }
};

}  // namespace tv_detail

struct TvInstance {
  Index h, w;
  Vector image;  // flattened row-major, intensities in [0, 1]
  double alpha;
  Boundary bc;
  LinearOperator grad;
  LinearOperator div;

  TvInstance(Vector img, Index h_, Index w_, double alpha_, Boundary bc_ = Boundary::Periodic)
      : h(h_),
        w(w_),
        image(std::move(img)),
        alpha(alpha_),
        bc(bc_),
        grad(grad2d(h_, w_, bc_)),
        div(div2d(h_, w_, bc_)),
        cache_(std::make_shared<Cache>()) {
    require(alpha > 0.0, "TvInstance: alpha must be positive");
    require(h >= 2 && w >= 2, "TvInstance: grid must be at least 2 x 2");
    require_dims(image.size() == h * w, "TvInstance: image size mismatch");
    require(image.allFinite(), "TvInstance: image must be finite");
    if (bc == Boundary::Periodic) fourier_ = std::make_shared<tv_detail::Fourier>(h, w);
  }

  Index pixels() const { return h * w; }

  //  min ||y||_{2,1} + alpha/2 ||x - b||^2  s.t.  grad x - y = 0:
  //  the l21 block rides the f slot with operator -I, the quadratic data
  //  term the g slot with operator grad.
  AdmProblem adm_problem() const {
    return AdmProblem(ProxFunction::group_l21_norm(pixels()),
                      ProxFunction::squared_l2(pixels(), alpha, image),
                      LinearOperator::scaled_identity(2 * pixels(), -1.0), grad,
                      Vector::Zero(2 * pixels()));
  }

  double primal_objective(const Vector& x, const Vector& y) const {
    return norm_l21(y) + 0.5 * alpha * (x - image).squaredNorm();
  }
  double primal_objective_x(const Vector& x) const {
    return primal_objective(x, grad.apply(x));
  }
  double dual_objective(const Vector& u) const {
    return 0.5 * (div.apply(u) + alpha * image).squaredNorm() / alpha;
  }
  // Optimality relation of the data term: x = b + div(u)/alpha.
  Vector primal_from_dual(const Vector& u) const { return image + div.apply(u) / alpha; }

  // (alpha I + 1/lambda grad* grad)^-1 rhs
  Vector solve_image_system(const Vector& rhs, double lambda, TvSolvePath path) const {
    if (path == TvSolvePath::Fft) {
      require(bc == Boundary::Periodic, "TvInstance: Fourier path needs periodic boundary");
      return fourier_->solve_image_system(rhs, alpha, 1.0 / lambda);
    }
    return image_llt(lambda)->solve(rhs);
  }

  // (lambda I + 1/alpha div* div)^-1 rhs
  Vector solve_field_system(const Vector& rhs, double lambda, TvSolvePath path) const {
    if (path == TvSolvePath::Fft) {
      require(bc == Boundary::Periodic, "TvInstance: Fourier path needs periodic boundary");
      return fourier_->solve_field_system(rhs, lambda, 1.0 / alpha);
    }
    return field_llt(lambda)->solve(rhs);
  }

 private:
  using LltPtr = std::shared_ptr<Eigen::LLT<Matrix>>;
  struct Cache {
    std::mutex mutex;
    std::map<double, LltPtr> image_by_lambda;
    std::map<double, LltPtr> field_by_lambda;
  };

  LltPtr image_llt(double lambda) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->image_by_lambda.find(lambda);
    if (it != cache_->image_by_lambda.end()) return it->second;
    const Matrix& g = grad.materialize();
    Matrix m = g.transpose() * g / lambda;
    m.diagonal().array() += alpha;
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(m);
    if (llt->info() != Eigen::Success)
      throw SingularSystem("TvInstance: image system not positive definite");
    cache_->image_by_lambda.emplace(lambda, llt);
    return llt;
  }

  LltPtr field_llt(double lambda) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->field_by_lambda.find(lambda);
    if (it != cache_->field_by_lambda.end()) return it->second;
    const Matrix& g = grad.materialize();
    Matrix m = g * g.transpose() / alpha;
    m.diagonal().array() += lambda;
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(m);
    if (llt->info() != Eigen::Success)
      throw SingularSystem("TvInstance: field system not positive definite");
    cache_->field_by_lambda.emplace(lambda, llt);
    return llt;
  }

  std::shared_ptr<tv_detail::Fourier> fourier_;
  std::shared_ptr<Cache> cache_;
};

inline TvInstance make_tv(Vector image, Index h, Index w, double alpha,
                          Boundary bc = Boundary::Periodic) {
  return TvInstance(std::move(image), h, w, alpha, bc);
}

// Two-level block image plus small seeded uniform noise; the noise keeps
// shrinkage magnitudes away from their kink points.
inline TvInstance make_tv_synthetic(Index h, Index w, double alpha, std::uint64_t seed,
                                    Boundary bc = Boundary::Periodic) {
  Rng rng(seed);
  Vector img(h * w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j)
      img[i * w + j] = (j < w / 2 ? 0.3 : 0.7) + rng.uniform(-0.05, 0.05);
  return TvInstance(std::move(img), h, w, alpha, bc);
}

// --- the four specialized iterations --------------------------------------

// Primal ADM: x-update solves the image system, then vector shrinkage.
inline SteppedAlgorithm tv_primal_stepper(std::shared_ptr<const TvInstance> inst,
                                          TvSolvePath path = TvSolvePath::Direct) {
  return {"tv-primal",
          [inst, path](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector rhs =
                inst->alpha * inst->image +
                inst->grad.adjoint_apply(st.at("y") - lam * st.at("z")) / lam;
            const Vector x = inst->solve_image_system(rhs, lam, path);
            const Vector gx = inst->grad.apply(x);
            const Vector y = prox_group_l21(gx + lam * st.at("z"), lam);
            SolverState next("tv-primal", {}, st.k() + 1);
            next.set("x", x);
            next.set("Gx", gx);
            next.set("y", y);
            next.set("z", st.at("z") + (gx - y) / lam);
            return next;
          },
          [inst](const SolverState& st) -> double {
            if (!st.has("x")) return detail::quiet_nan();
            return inst->primal_objective(st.at("x"), st.at("y"));
          },
          [](const SolverState& st) -> double {
            return st.has("x") ? (st.at("Gx") - st.at("y")).norm() : detail::quiet_nan();
          }};
}

inline SolverState make_tv_primal_state(const Vector& y0, const Vector& z0) {
  SolverState st("tv-primal", {});
  st.set("y", y0);
  st.set("z", z0);
  return st;
}

// Dual ADM: u-update solves the field system, then the blockwise projection.
inline SteppedAlgorithm tv_dual_stepper(std::shared_ptr<const TvInstance> inst,
                                        TvSolvePath path = TvSolvePath::Direct) {
  return {"tv-dual",
          [inst, path](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector rhs = lam * st.at("v") + st.at("z") +
                               inst->grad.apply(inst->image);
            const Vector u = inst->solve_field_system(rhs, lam, path);
            const Vector v = project_l2inf_ball(u - st.at("z") / lam);
            SolverState next("tv-dual", {}, st.k() + 1);
            next.set("u", u);
            next.set("v", v);
            next.set("z", st.at("z") + lam * (v - u));
            return next;
          },
          [inst](const SolverState& st) -> double {
            return st.has("u") ? inst->dual_objective(st.at("u")) : detail::quiet_nan();
          },
          [](const SolverState& st) -> double {
            return st.has("u") ? (st.at("u") - st.at("v")).norm() : detail::quiet_nan();
          }};
}

inline SolverState make_tv_dual_state(const Vector& v0, const Vector& z0) {
  SolverState st("tv-dual", {});
  st.set("v", v0);
  st.set("z", z0);
  return st;
}

// Primal-dual iteration: dual extrapolation, image solve, projection.
inline SteppedAlgorithm tv_primal_dual_stepper(std::shared_ptr<const TvInstance> inst,
                                               TvSolvePath path = TvSolvePath::Direct) {
  return {"tv-pd",
          [inst, path](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector vbar = 2.0 * st.at("v") - st.at("v_prev");
            const Vector rhs =
                inst->alpha * inst->image +
                inst->grad.adjoint_apply(st.at("Gx") - lam * vbar) / lam;
            const Vector x = inst->solve_image_system(rhs, lam, path);
            const Vector gx = inst->grad.apply(x);
            const Vector v = project_l2inf_ball(st.at("v") + gx / lam);
            SolverState next("tv-pd", {}, st.k() + 1);
            next.set("x", x);
            next.set("Gx", gx);
            next.set("v", v);
            next.set("v_prev", st.at("v"));
            return next;
          },
          [inst](const SolverState& st) -> double {
            return st.has("x") ? inst->primal_objective_x(st.at("x")) : detail::quiet_nan();
          },
          [](const SolverState& st) -> double {
            return st.has("v_prev") ? (st.at("v") - st.at("v_prev")).norm()
                                    : detail::quiet_nan();
          }};
}

inline SolverState make_tv_primal_dual_state(const TvInstance& inst, const Vector& x0,
                                             const Vector& v0, const Vector& v_prev) {
  SolverState st("tv-pd", {});
  st.set("x", x0);
  st.set("Gx", inst.grad.apply(x0));
  st.set("v", v0);
  st.set("v_prev", v_prev);
  return st;
}

// Order-swapped primal ADM: shrinkage first, then the image solve.
inline SteppedAlgorithm tv_swapped_stepper(std::shared_ptr<const TvInstance> inst,
                                           TvSolvePath path = TvSolvePath::Direct) {
  return {"tv-swap",
          [inst, path](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector y = prox_group_l21(st.at("Gx") + lam * st.at("z"), lam);
            const Vector rhs = inst->alpha * inst->image +
                               inst->grad.adjoint_apply(y - lam * st.at("z")) / lam;
            const Vector x = inst->solve_image_system(rhs, lam, path);
            const Vector gx = inst->grad.apply(x);
            SolverState next("tv-swap", {}, st.k() + 1);
            next.set("y", y);
            next.set("x", x);
            next.set("Gx", gx);
            next.set("z", st.at("z") + (gx - y) / lam);
            return next;
          },
          [inst](const SolverState& st) -> double {
            if (!st.has("y")) return detail::quiet_nan();
            return inst->primal_objective(st.at("x"), st.at("y"));
          },
          [](const SolverState& st) -> double {
            return st.has("y") ? (st.at("Gx") - st.at("y")).norm() : detail::quiet_nan();
          }};
}

inline SolverState make_tv_swapped_state(const TvInstance& inst, const Vector& x0,
                                         const Vector& z0) {
  SolverState st("tv-swap", {});
  st.set("x", x0);
  st.set("Gx", inst.grad.apply(x0));
  st.set("z", z0);
  return st;
}

}  // namespace admeq

#endif  // ADMEQ_INSTANCES_TV_HPP_
