#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pnmc {

/// Vector in Minkowski 4-space, standard basis, component 3 is timelike.
using MinkVec = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Signature (+,+,+,-) as a diagonal.
inline const Mat4& metric() {
  static const Mat4 eta = Eigen::Vector4d(1.0, 1.0, 1.0, -1.0).asDiagonal();
  return eta;
}

inline double lorentz_inner(const MinkVec& a, const MinkVec& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3];
}

inline double lorentz_norm2(const MinkVec& a) { return lorentz_inner(a, a); }

/// Target Gram matrix of a pseudo-orthonormal frame in row order (x, y, n1, n2).
inline const Mat4& pseudo_orthonormal_gram() {
  static const Mat4 g = [] {
    Mat4 m = Mat4::Zero();
    m(0, 1) = m(1, 0) = -1.0;
    m(2, 2) = m(3, 3) = 1.0;
    return m;
  }();
  return g;
}

/**
 * Moving frame {x, y, n1, n2}. Row i of the 4x4 array holds the
 * components of the i-th frame vector, so a coefficient matrix acting
 * on the frame multiplies from the left.
 */
class FrameState {
 public:
  FrameState() : rows_(Mat4::Zero()) {}
  explicit FrameState(const Mat4& rows) : rows_(rows) {}
  FrameState(const MinkVec& x, const MinkVec& y, const MinkVec& n1, const MinkVec& n2) {
    rows_.row(0) = x.transpose();
    rows_.row(1) = y.transpose();
    rows_.row(2) = n1.transpose();
    rows_.row(3) = n2.transpose();
  }

  MinkVec x() const { return rows_.row(0).transpose(); }
  MinkVec y() const { return rows_.row(1).transpose(); }
  MinkVec n1() const { return rows_.row(2).transpose(); }
  MinkVec n2() const { return rows_.row(3).transpose(); }
  MinkVec vec(int i) const { return rows_.row(i).transpose(); }

  const Mat4& rows() const { return rows_; }
  Mat4& rows() { return rows_; }

  /// All pairwise inner products, F * eta * F^T.
  Mat4 gram() const { return rows_ * metric() * rows_.transpose(); }

 private:
  Mat4 rows_;
};

/// Max deviation of the ten distinct inner products from their pseudo-orthonormal values.
inline double gram_residual(const FrameState& frame) {
  const Mat4 g = frame.gram();
  const Mat4& target = pseudo_orthonormal_gram();
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) worst = std::max(worst, std::abs(g(i, j) - target(i, j)));
  return worst;
}

/// x = (e1+e4)/sqrt2, y = (-e1+e4)/sqrt2, n1 = e2, n2 = e3.
inline FrameState standard_frame() {
  const double s = 1.0 / std::sqrt(2.0);
  return FrameState(MinkVec(s, 0, 0, s), MinkVec(-s, 0, 0, s), MinkVec(0, 1, 0, 0),
                    MinkVec(0, 0, 1, 0));
}

/// Frames handed in by callers must be pseudo-orthonormal to this tolerance.
inline constexpr double kFrameTolerance = 1e-8;

}  // namespace pnmc
