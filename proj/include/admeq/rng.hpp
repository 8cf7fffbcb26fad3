#ifndef ADMEQ_RNG_HPP_
#define ADMEQ_RNG_HPP_

#include "admeq/core.hpp"

#include <cstdint>

namespace admeq {

// Deterministic random source for instance generation and test data.
//
// The generator is fixed so that instances are reproducible across platforms
// and implementations:
//   * state update: splitmix64 (Steele, Lea, Flood 2014),
//   * uniforms:     u = (x >> 11) * 2^-53  in [0, 1),
//   * normals:      Box-Muller on two uniforms, both outputs consumed in order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller; u1 is bumped away from 0 so the log is finite.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Matrix normal_matrix(Index rows, Index cols) {
    // Row-major fill order, fixed for reproducibility.
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  // k-sparse vector with unit-scale normal entries at the first k slots of a
  // Fisher-Yates-style index draw.
  Vector sparse_vector(Index n, Index k) {
    Vector v = Vector::Zero(n);
    for (Index drawn = 0; drawn < k; ++drawn) {
      Index idx = static_cast<Index>(next_u64() % static_cast<std::uint64_t>(n));
      while (v[idx] != 0.0) idx = (idx + 1) % n;
      v[idx] = normal();
    }
    return v;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace admeq

#endif  // ADMEQ_RNG_HPP_
