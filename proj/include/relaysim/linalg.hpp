#ifndef RELAYSIM_LINALG_HPP
#define RELAYSIM_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/phasor.hpp"

namespace relaysim {

/// Dense square complex matrix in row-major storage.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n, Complex{}) {}

  std::size_t size() const { return n_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }

  bool operator==(const ComplexMatrix& o) const {
    return n_ == o.n_ && data_ == o.data_;
  }

  double max_abs() const {
    double m = 0.0;
    for (const Complex& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Complex> data_;
};

/// LU factorization with partial pivoting.  Factor once, solve many
/// right-hand sides.  Throws SingularNetwork when a pivot collapses relative
/// to the matrix scale.
class LuDecomposition {
 public:
  explicit LuDecomposition(ComplexMatrix a)
      : lu_(std::move(a)), perm_(lu_.size()) {
    const std::size_t n = lu_.size();
    const double tiny = 1e-13 * std::max(1.0, lu_.max_abs());
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      double best = std::abs(lu_(col, col));
      for (std::size_t r = col + 1; r < n; ++r) {
        const double cand = std::abs(lu_(r, col));
        if (cand > best) {
          best = cand;
          pivot = r;
        }
      }
      if (best < tiny) {
        throw SingularNetwork("matrix is singular to working precision");
      }
      if (pivot != col) {
        std::swap(perm_[pivot], perm_[col]);
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(lu_(pivot, j), lu_(col, j));
        }
      }
      const Complex inv_pivot = 1.0 / lu_(col, col);
      for (std::size_t r = col + 1; r < n; ++r) {
        const Complex factor = lu_(r, col) * inv_pivot;
        lu_(r, col) = factor;
        for (std::size_t j = col + 1; j < n; ++j) {
          lu_(r, j) -= factor * lu_(col, j);
        }
      }
    }
  }

  std::size_t size() const { return lu_.size(); }

  std::vector<Complex> solve(const std::vector<Complex>& rhs) const {
    const std::size_t n = lu_.size();
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
    // Forward substitution (unit lower triangle).
    for (std::size_t i = 1; i < n; ++i) {
      Complex s = x[i];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
      x[i] = s;
    }
    // Back substitution.
    for (std::size_t ii = n; ii-- > 0;) {
      Complex s = x[ii];
      for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x[j];
      x[ii] = s / lu_(ii, ii);
    }
    return x;
  }

 private:
  ComplexMatrix lu_;
  std::vector<std::size_t> perm_;
};

/// One-shot convenience wrapper around LuDecomposition.
inline std::vector<Complex> lu_solve(const ComplexMatrix& a,
                                     const std::vector<Complex>& rhs) {
  return LuDecomposition(a).solve(rhs);
}

}  // namespace relaysim

#endif  // RELAYSIM_LINALG_HPP
