#pragma once

#include "holder_vi/core.hpp"

#include <initializer_list>

namespace testing {

using hvi::Matrix;
using hvi::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

/// F(z) = M z + b, with zero higher derivatives.
inline hvi::Operator affine(Matrix M, Vector b = {}) {
  const int d = static_cast<int>(M.rows());
  if (b.size() == 0) b = Vector::Zero(d);
  return hvi::Operator(
      d, [M, b](const Vector& z) -> Vector { return M * z + b; },
      [M](const Vector&) -> Matrix { return M; },
      [d](int, const Vector&, std::span<const Vector>) -> Vector { return Vector::Zero(d); });
}

inline hvi::Operator identity(int d) { return affine(Matrix::Identity(d, d)); }

/// F(x, y) = (y, -x).
inline hvi::Operator rotation() {
  Matrix M(2, 2);
  M << 0, 1, -1, 0;
  return affine(M);
}

/// Scalar F(z) = z^3 with its second and third derivatives.
inline hvi::Operator cube() {
  return hvi::Operator(
      1, [](const Vector& z) -> Vector { return z.array().cube().matrix(); },
      [](const Vector& z) -> Matrix { return Matrix::Constant(1, 1, 3 * z(0) * z(0)); },
      [](int order, const Vector& z, std::span<const Vector> dirs) -> Vector {
        double c = order == 2 ? 6 * z(0) : order == 3 ? 6.0 : 0.0;
        for (const auto& v : dirs) c *= v(0);
        return Vector::Constant(1, c);
      });
}

/// F(z) = ||z|| z without higher derivatives.
inline hvi::Operator norm_times_z(int d) {
  return hvi::Operator(
      d, [](const Vector& z) -> Vector { return hvi::norm(z) * z; },
      [d](const Vector& z) -> Matrix {
        const double n = hvi::norm(z);
        Matrix J = n * Matrix::Identity(d, d);
        if (n > 0) J += z * z.transpose() / n;
        return J;
      });
}

}  // namespace testing
