#ifndef ADMEQ_PROX_HPP_
#define ADMEQ_PROX_HPP_

#include "admeq/core.hpp"
#include "admeq/linear_operator.hpp"
#include "admeq/quadratic.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <variant>

namespace admeq {

// ---------------------------------------------------------------------------
// Elementwise / blockwise proximal maps and projections.
// ---------------------------------------------------------------------------

// Soft threshold: prox of tau * ||.||_1.
inline Vector prox_l1(const Vector& x, double tau) {
  require(tau > 0.0, "prox_l1: tau must be positive");
  return x.array().sign() * (x.array().abs() - tau).max(0.0);
}

// Projection onto the unit l_inf ball (componentwise clamp to [-1, 1]).
inline Vector project_linf_ball(const Vector& x) {
  return x.array().max(-1.0).min(1.0);
}

// Vector shrinkage on stacked 2-vectors (one pair per grid point):
// prox of tau * sum_p |y_p|, |.| the Euclidean norm of the pair.
// A zero pair stays exactly zero.
inline Vector prox_group_l21(const Vector& y, double tau) {
  require(tau > 0.0, "prox_group_l21: tau must be positive");
  require_dims(y.size() % 2 == 0, "prox_group_l21: expected stacked 2-vectors");
  Vector out(y.size());
  for (Index p = 0; p < y.size(); p += 2) {
    const double a = y[p], b = y[p + 1];
    const double mag = std::sqrt(a * a + b * b);
    const double scale = (mag > tau) ? (1.0 - tau / mag) : 0.0;
    out[p] = scale * a;
    out[p + 1] = scale * b;
  }
  return out;
}

// Projection onto {v : max_p |v_p| <= 1} for stacked 2-vectors.
inline Vector project_l2inf_ball(const Vector& v) {
  require_dims(v.size() % 2 == 0, "project_l2inf_ball: expected stacked 2-vectors");
  Vector out(v.size());
  for (Index p = 0; p < v.size(); p += 2) {
    const double a = v[p], b = v[p + 1];
    const double mag = std::sqrt(a * a + b * b);
    const double scale = 1.0 / std::max(1.0, mag);
    out[p] = scale * a;
    out[p + 1] = scale * b;
  }
  return out;
}

inline double norm_l1(const Vector& x) { return x.lpNorm<1>(); }

inline double norm_l21(const Vector& y) {
  double s = 0.0;
  for (Index p = 0; p < y.size(); p += 2) s += std::hypot(y[p], y[p + 1]);
  return s;
}

// ---------------------------------------------------------------------------
// ProxFunction: a convex function exposed through value and prox oracles.
// ---------------------------------------------------------------------------

// Structural payloads a joint subproblem solver can exploit.
struct QuadraticStructure {
  QuadraticForm form;
};
struct AffineSetStructure {
  LinearOperator e;
  Vector d;
  bool allow_pseudo = false;
};
using ProxStructure = std::variant<std::monostate, QuadraticStructure, AffineSetStructure>;

class ProxFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(const Vector&, double)>;

  ProxFunction(Index dim, ValueFn value, ProxFn prox, bool affine_prox)
      : dim_(dim), value_(std::move(value)), prox_(std::move(prox)), affine_prox_(affine_prox) {
    require(dim > 0, "ProxFunction: dimension must be positive");
  }

  Index dim() const { return dim_; }
  bool is_affine_prox() const { return affine_prox_; }

  bool has_value() const { return static_cast<bool>(value_); }
  double value(const Vector& x) const {
    if (!value_) throw ConjugateUnavailable("ProxFunction: value oracle unavailable");
    require_dims(x.size() == dim_, "ProxFunction::value: size mismatch");
    return value_(x);
  }

  Vector prox(const Vector& x, double tau) const {
    require(tau > 0.0, "ProxFunction::prox: tau must be positive");
    require_dims(x.size() == dim_, "ProxFunction::prox: size mismatch");
    return prox_(x, tau);
  }

  bool has_conjugate_value() const { return static_cast<bool>(conjugate_value_); }
  double conjugate_value(const Vector& v) const {
    if (!conjugate_value_)
      throw ConjugateUnavailable("ProxFunction: conjugate value oracle unavailable");
    require_dims(v.size() == dim_, "ProxFunction::conjugate_value: size mismatch");
    return conjugate_value_(v);
  }

  const ProxStructure& structure() const { return structure_; }
  const QuadraticStructure* quadratic_structure() const {
    return std::get_if<QuadraticStructure>(&structure_);
  }
  const AffineSetStructure* affine_set_structure() const {
    return std::get_if<AffineSetStructure>(&structure_);
  }

  ProxFunction& with_conjugate_value(ValueFn fn) {
    conjugate_value_ = std::move(fn);
    return *this;
  }
  ProxFunction& with_structure(ProxStructure s) {
    structure_ = std::move(s);
    return *this;
  }

  // --- named constructors ---------------------------------------------------

  static ProxFunction l1_norm(Index n) {
    ProxFunction f(n, [](const Vector& x) { return norm_l1(x); }, &prox_l1,
                   /*affine=*/false);
    f.conjugate_value_ = [](const Vector& v) {
      return v.cwiseAbs().maxCoeff() <= 1.0 + 1e-12 ? 0.0 : kInfinity;
    };
    return f;
  }

  static ProxFunction linf_ball_indicator(Index n) {
    ProxFunction f(
        n,
        [](const Vector& x) { return x.cwiseAbs().maxCoeff() <= 1.0 + 1e-12 ? 0.0 : kInfinity; },
        [](const Vector& x, double) { return project_linf_ball(x); },
        /*affine=*/false);
    f.conjugate_value_ = [](const Vector& v) { return norm_l1(v); };
    return f;
  }

  static ProxFunction group_l21_norm(Index pairs) {
    ProxFunction f(2 * pairs, [](const Vector& y) { return norm_l21(y); }, &prox_group_l21,
                   /*affine=*/false);
    f.conjugate_value_ = [](const Vector& v) {
      for (Index p = 0; p < v.size(); p += 2)
        if (std::hypot(v[p], v[p + 1]) > 1.0 + 1e-12) return kInfinity;
      return 0.0;
    };
    return f;
  }

  static ProxFunction l2inf_ball_indicator(Index pairs) {
    ProxFunction f(
        2 * pairs,
        [](const Vector& v) {
          for (Index p = 0; p < v.size(); p += 2)
            if (std::hypot(v[p], v[p + 1]) > 1.0 + 1e-12) return kInfinity;
          return 0.0;
        },
        [](const Vector& v, double) { return project_l2inf_ball(v); },
        /*affine=*/false);
    f.conjugate_value_ = [](const Vector& v) { return norm_l21(v); };
    return f;
  }

  static ProxFunction zero(Index n) {
    ProxFunction f(n, [](const Vector&) { return 0.0; },
                   [](const Vector& x, double) { return x; }, /*affine=*/true);
    f.conjugate_value_ = [](const Vector& v) { return v.norm() <= 1e-12 ? 0.0 : kInfinity; };
    f.structure_ = QuadraticStructure{
        QuadraticForm(LinearOperator::dense(Matrix::Zero(n, n)), Vector::Zero(n))};
    return f;
  }

  // <c, x>
  static ProxFunction linear(Vector c) {
    const Index n = c.size();
    auto cc = std::make_shared<Vector>(std::move(c));
    ProxFunction f(
        n, [cc](const Vector& x) { return cc->dot(x); },
        [cc](const Vector& x, double tau) -> Vector { return x - tau * (*cc); },
        /*affine=*/true);
    f.conjugate_value_ = [cc](const Vector& v) {
      return (v - *cc).norm() <= 1e-10 * (1.0 + cc->norm()) ? 0.0 : kInfinity;
    };
    f.structure_ =
        QuadraticStructure{QuadraticForm(LinearOperator::dense(Matrix::Zero(n, n)), *cc)};
    return f;
  }

  // Indicator of the single point {p}.
  static ProxFunction point_indicator(Vector p) {
    const Index n = p.size();
    auto pp = std::make_shared<Vector>(std::move(p));
    ProxFunction f(
        n,
        [pp](const Vector& x) {
          return (x - *pp).norm() <= 1e-10 * (1.0 + pp->norm()) ? 0.0 : kInfinity;
        },
        [pp](const Vector&, double) -> Vector { return *pp; }, /*affine=*/true);
    f.conjugate_value_ = [pp](const Vector& v) { return v.dot(*pp); };
    f.structure_ = AffineSetStructure{LinearOperator::identity(n), *pp};
    return f;
  }

  // Indicator of {x : Ex = d}; prox is the affine projection.
  static ProxFunction affine_indicator(const LinearOperator& e, Vector d,
                                       bool allow_pseudo = false) {
    auto proj = std::make_shared<AffineProjector>(e, d, allow_pseudo);
    ProxFunction f(
        e.cols(),
        [proj](const Vector& x) {
          return (proj->matrix() * x - proj->rhs()).norm() <= 1e-9 * (1.0 + proj->rhs().norm())
                     ? 0.0
                     : kInfinity;
        },
        [proj](const Vector& x, double) { return proj->project(x); },
        /*affine=*/true);
    f.structure_ = AffineSetStructure{e, std::move(d), allow_pseudo};
    return f;
  }

  static ProxFunction quadratic(QuadraticForm q) {
    auto qq = std::make_shared<QuadraticForm>(std::move(q));
    ProxFunction f(
        qq->dim(), [qq](const Vector& x) { return qq->value(x); },
        [qq](const Vector& x, double tau) { return qq->prox(x, tau); },
        /*affine=*/true);
    if (qq->conjugate_value(Vector::Zero(qq->dim())).has_value())
      f.conjugate_value_ = [qq](const Vector& v) { return *qq->conjugate_value(v); };
    f.structure_ = QuadraticStructure{*qq};
    return f;
  }

  // (weight/2) ||x - center||^2
  static ProxFunction squared_l2(Index n, double weight, Vector center) {
    require(weight > 0.0, "squared_l2: weight must be positive");
    auto c = std::make_shared<Vector>(std::move(center));
    ProxFunction f(
        n,
        [c, weight](const Vector& x) { return 0.5 * weight * (x - *c).squaredNorm(); },
        [c, weight](const Vector& x, double tau) -> Vector {
          return (x + (tau * weight) * (*c)) / (1.0 + tau * weight);
        },
        /*affine=*/true);
    f.conjugate_value_ = [c, weight](const Vector& v) {
      return 0.5 * v.squaredNorm() / weight + v.dot(*c);
    };
    f.structure_ = QuadraticStructure{QuadraticForm::scaled_norm(n, weight, *c)};
    return f;
  }

 private:
  Index dim_;
  ValueFn value_;
  ProxFn prox_;
  bool affine_prox_;
  ValueFn conjugate_value_;
  ProxStructure structure_;
};

// ---------------------------------------------------------------------------
// Conjugate calculus.
// ---------------------------------------------------------------------------

// h* built from h through the generalized Moreau decomposition:
//   prox_{tau h*}(x) = x - tau prox_{h/tau}(x/tau).
// The value oracle of h* is h's conjugate-value oracle when one is known;
// otherwise the conjugate carries no value oracle.
inline ProxFunction conjugate_prox(const ProxFunction& h) {
  auto hp = std::make_shared<ProxFunction>(h);
  ProxFunction::ValueFn value;
  if (h.has_conjugate_value())
    value = [hp](const Vector& v) { return hp->conjugate_value(v); };
  ProxFunction f(
      h.dim(), std::move(value),
      [hp](const Vector& x, double tau) -> Vector {
        return x - tau * hp->prox(x / tau, 1.0 / tau);
      },
      h.is_affine_prox());
  if (h.has_value())
    f.with_conjugate_value([hp](const Vector& x) { return hp->value(x); });
  return f;
}

// h(-.) : prox_{tau h(-.)}(x) = -prox_{tau h}(-x).
inline ProxFunction negated_arg(const ProxFunction& h) {
  auto hp = std::make_shared<ProxFunction>(h);
  ProxFunction::ValueFn value;
  if (h.has_value()) value = [hp](const Vector& x) { return hp->value(-x); };
  ProxFunction f(
      h.dim(), std::move(value),
      [hp](const Vector& x, double tau) -> Vector { return -hp->prox(-x, tau); },
      h.is_affine_prox());
  if (h.has_conjugate_value())
    f.with_conjugate_value([hp](const Vector& v) { return hp->conjugate_value(-v); });
  return f;
}

// u -> h*(-u), the combination both dual ADM forms need.
inline ProxFunction conjugate_prox_negated(const ProxFunction& h) {
  return negated_arg(conjugate_prox(h));
}

// Value oracle of the infimal postcomposition of f by x -> Ax + b:
//   (L . f)*(v) = f*(A* v) + <v, b>.
inline std::function<double(const Vector&)> conjugate_of_postcomposition(
    const ProxFunction& f, const LinearOperator& a, const Vector& b) {
  if (!f.has_conjugate_value())
    throw ConjugateUnavailable("conjugate_of_postcomposition: f* value oracle unavailable");
  require_dims(a.cols() == f.dim() && a.rows() == b.size(),
               "conjugate_of_postcomposition: dimension mismatch");
  auto fp = std::make_shared<ProxFunction>(f);
  auto ap = std::make_shared<LinearOperator>(a);
  auto bp = std::make_shared<Vector>(b);
  return [fp, ap, bp](const Vector& v) {
    return fp->conjugate_value(ap->adjoint_apply(v)) + v.dot(*bp);
  };
}

// Prox of g(A .) for a tight frame A (AA* = c I): the composition then has the
// closed form  prox_{tau gA}(x) = x + A*(prox_{c tau g}(Ax) - Ax)/c.
inline ProxFunction prox_composition_tight_frame(const ProxFunction& g, const LinearOperator& a) {
  require_dims(a.rows() == g.dim(), "prox_composition_tight_frame: dimension mismatch");
  const Matrix& am = a.materialize();
  const Matrix gram = am * am.transpose();
  const double c = gram.diagonal().mean();
  if (c <= 0.0 ||
      (gram - c * Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() >
          1e-10 * (1.0 + std::abs(c)))
    throw NoProxForComposition("prox_composition_tight_frame: AA* is not a positive multiple of I");
  auto gp = std::make_shared<ProxFunction>(g);
  auto ap = std::make_shared<LinearOperator>(a);
  ProxFunction::ValueFn value;
  if (g.has_value()) value = [gp, ap](const Vector& x) { return gp->value(ap->apply(x)); };
  return ProxFunction(
      a.cols(), std::move(value),
      [gp, ap, c](const Vector& x, double tau) -> Vector {
        const Vector ax = ap->apply(x);
        return x + ap->adjoint_apply(gp->prox(ax, c * tau) - ax) / c;
      },
      g.is_affine_prox());
}

// Midpoint affinity probe: returns the largest deviation of
// prox((x1+x2)/2) from (prox(x1)+prox(x2))/2 over a few random pairs.
template <typename RngT>
double midpoint_affinity_deviation(const ProxFunction& h, RngT& rng, double tau = 1.0,
                                   int trials = 8) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector x1 = rng.normal_vector(h.dim());
    const Vector x2 = rng.normal_vector(h.dim());
    const Vector lhs = h.prox(0.5 * (x1 + x2), tau);
    const Vector rhs = 0.5 * (h.prox(x1, tau) + h.prox(x2, tau));
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace admeq

#endif  // ADMEQ_PROX_HPP_
