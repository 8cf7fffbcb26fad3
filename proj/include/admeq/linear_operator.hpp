#ifndef ADMEQ_LINEAR_OPERATOR_HPP_
#define ADMEQ_LINEAR_OPERATOR_HPP_

#include "admeq/core.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

namespace admeq {

// Finite-dimensional linear map with an adjoint.
//
// Both directions are stored as callables; a dense materialization is kept
// when available (or built on demand) for factorization-based solvers.
// Copies share the materialization cache and the apply counter, so counting
// operator products across a solver run works through copies.
class LinearOperator {
 public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  enum class Kind { General, ScaledIdentity, Dense };

  LinearOperator(Index rows, Index cols, ApplyFn apply, ApplyFn adjoint)
      : rows_(rows),
        cols_(cols),
        apply_(std::move(apply)),
        adjoint_(std::move(adjoint)),
        shared_(std::make_shared<Shared>()) {
    require(rows > 0 && cols > 0, "LinearOperator: dimensions must be positive");
  }

  static LinearOperator dense(Matrix m) {
    auto mat = std::make_shared<Matrix>(std::move(m));
    LinearOperator op(
        mat->rows(), mat->cols(),
        [mat](const Vector& x) -> Vector { return (*mat) * x; },
        [mat](const Vector& y) -> Vector { return mat->transpose() * y; });
    op.kind_ = Kind::Dense;
    op.shared_->dense = *mat;
    return op;
  }

  static LinearOperator identity(Index n) { return scaled_identity(n, 1.0); }

  static LinearOperator scaled_identity(Index n, double c) {
    require(c != 0.0, "scaled_identity: scale must be nonzero");
    LinearOperator op(
        n, n, [c](const Vector& x) -> Vector { return c * x; },
        [c](const Vector& y) -> Vector { return c * y; });
    op.kind_ = Kind::ScaledIdentity;
    op.scale_ = c;
    return op;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  bool is_scaled_identity() const { return kind_ == Kind::ScaledIdentity; }

  Vector apply(const Vector& x) const {
    require_dims(x.size() == cols_, "LinearOperator::apply: size mismatch");
    shared_->apply_count.fetch_add(1, std::memory_order_relaxed);
    return apply_(x);
  }

  Vector adjoint_apply(const Vector& y) const {
    require_dims(y.size() == rows_, "LinearOperator::adjoint_apply: size mismatch");
    shared_->apply_count.fetch_add(1, std::memory_order_relaxed);
    return adjoint_(y);
  }

  // Total apply + adjoint_apply calls across all copies of this operator.
  long call_count() const { return shared_->apply_count.load(std::memory_order_relaxed); }
  void reset_call_count() const { shared_->apply_count.store(0, std::memory_order_relaxed); }

  // Dense matrix of the map; built column-by-column on first use and cached.
  const Matrix& materialize() const {
    std::lock_guard<std::mutex> lock(shared_->mutex);
    if (!shared_->dense) {
      Matrix m(rows_, cols_);
      Vector e = Vector::Zero(cols_);
      for (Index j = 0; j < cols_; ++j) {
        e[j] = 1.0;
        m.col(j) = apply_(e);
        e[j] = 0.0;
      }
      shared_->dense = std::move(m);
    }
    return *shared_->dense;
  }

 private:
  struct Shared {
    std::mutex mutex;
    std::optional<Matrix> dense;
    std::atomic<long> apply_count{0};
  };

  Index rows_;
  Index cols_;
  ApplyFn apply_;
  ApplyFn adjoint_;
  Kind kind_ = Kind::General;
  double scale_ = 0.0;
  std::shared_ptr<Shared> shared_;
};

}  // namespace admeq

#endif  // ADMEQ_LINEAR_OPERATOR_HPP_
