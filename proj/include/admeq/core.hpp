#ifndef ADMEQ_CORE_HPP_
#define ADMEQ_CORE_HPP_

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace admeq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Default absolute tolerance for internal consistency checks on unit-scale data.
inline constexpr double kCheckTol = 1e-10;

// Iterate norms beyond this are treated as divergence.
inline constexpr double kBlowupNorm = 1e12;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct SingularSystem : Error {
  using Error::Error;
};
struct RankDeficient : Error {
  using Error::Error;
};
struct ConjugateUnavailable : Error {
  using Error::Error;
};
struct NoSubproblemSolver : Error {
  using Error::Error;
};
struct NoProxForComposition : Error {
  using Error::Error;
};
struct NumericalBlowup : Error {
  using Error::Error;
};
struct NotAffineProx : Error {
  using Error::Error;
};
struct InitUnsatisfiable : Error {
  using Error::Error;
};
struct InvalidArgument : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

inline void require_dims(bool cond, const std::string& what) {
  if (!cond) throw DimensionMismatch(what);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// Throws NumericalBlowup if v contains NaN/Inf or exceeds the divergence bound.
inline void check_iterate(const Vector& v, const char* name) {
  if (!v.allFinite() || v.norm() > kBlowupNorm)
    throw NumericalBlowup(std::string("iterate ") + name + " diverged");
}

}  // namespace admeq

#endif  // ADMEQ_CORE_HPP_
