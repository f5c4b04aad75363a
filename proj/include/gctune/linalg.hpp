#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace gctune {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Pearson correlation of the columns of `data` (rows are observations).
// Columns with zero variance are uncorrelated with everything else.
template <typename Derived>
Matrix<typename Derived::Scalar> pearson_correlation(const Eigen::MatrixBase<Derived>& data) {
  using Scalar = typename Derived::Scalar;
  const auto n = data.rows();
  const auto d = data.cols();
  Matrix<Scalar> centered = data.rowwise() - data.colwise().mean();
  Matrix<Scalar> cov = (centered.transpose() * centered) / static_cast<Scalar>(std::max<Eigen::Index>(n - 1, 1));
  Vector<Scalar> sd = cov.diagonal().cwiseMax(Scalar(0)).cwiseSqrt();
  Matrix<Scalar> corr = Matrix<Scalar>::Identity(d, d);
  const Scalar tiny = Scalar(1e-12);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Scalar r = (sd(i) > tiny && sd(j) > tiny) ? cov(i, j) / (sd(i) * sd(j)) : Scalar(0);
      r = std::clamp(r, Scalar(-1), Scalar(1));
      corr(i, j) = corr(j, i) = r;
    }
  return corr;
}

// Symmetric part with negative eigenvalues set to zero.
template <typename Derived>
Matrix<typename Derived::Scalar> clip_to_psd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> sym = (m + m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sym);
  if (eig.eigenvalues().minCoeff() >= Scalar(0)) return sym;
  Vector<Scalar> lambda = eig.eigenvalues().cwiseMax(Scalar(0));
  Matrix<Scalar> out = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return (out + out.transpose()) / Scalar(2);
}

// Eigenvalue clipping followed by rescaling back to a unit diagonal. The
// rescaling is a congruence, so the result stays positive semidefinite.
template <typename Derived>
Matrix<typename Derived::Scalar> repair_correlation(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = clip_to_psd(m);
  Vector<Scalar> d = out.diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > Scalar(0) ? Scalar(1) / std::sqrt(d(i)) : Scalar(0);
  out = d.asDiagonal() * out * d.asDiagonal();
  for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, i) = Scalar(1);
  return out;
}

// Factor L with L * L^T == m for a positive semidefinite m (eigen route, so
// singular matrices are fine).
template <typename Derived>
Matrix<typename Derived::Scalar> psd_factor(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig((m + m.transpose()) / Scalar(2));
  Vector<Scalar> root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig((m + m.transpose()) / Scalar(2), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

template <typename Scalar>
struct ConditionalGaussian {
  Vector<Scalar> mean;
  Matrix<Scalar> cov;
  // Conditioning variance was below threshold; mean is zero, cov is the
  // unconditioned block.
  bool independent = false;
};

// Zero-mean Gaussian with covariance `sigma`, conditioned on coordinate `c`
// taking value `value`. Returns the distribution of the remaining coordinates
// in their original order; the Schur complement is clipped to PSD.
template <typename Derived>
ConditionalGaussian<typename Derived::Scalar> condition_on(const Eigen::MatrixBase<Derived>& sigma, Eigen::Index c,
                                                            typename Derived::Scalar value,
                                                            typename Derived::Scalar min_variance = 1e-12) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = sigma.rows();
  Eigen::VectorXi keep(d - 1);
  for (Eigen::Index i = 0, k = 0; i < d; ++i)
    if (i != c) keep(k++) = static_cast<int>(i);

  Matrix<Scalar> uu(d - 1, d - 1);
  Vector<Scalar> uc(d - 1);
  for (Eigen::Index i = 0; i < d - 1; ++i) {
    uc(i) = sigma(keep(i), c);
    for (Eigen::Index j = 0; j < d - 1; ++j) uu(i, j) = sigma(keep(i), keep(j));
  }

  ConditionalGaussian<Scalar> out;
  const Scalar cc = sigma(c, c);
  if (!(cc > min_variance)) {
    out.mean = Vector<Scalar>::Zero(d - 1);
    out.cov = uu;
    out.independent = true;
    return out;
  }
  out.mean = uc * (value / cc);
  out.cov = clip_to_psd(uu - uc * uc.transpose() / cc);
  return out;
}

}  // namespace gctune
