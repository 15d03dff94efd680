// Locate step: find the columns of X that are (scaled) columns of V.
//
// spa           successive projection on the raw columns
// orcon_spa     drop columns with 1-norm <= t, rescale the rest to unit
//               1-norm (conic hull -> convex hull), then SPA
// precond_spa   SPA on the rank-R whitened matrix Sigma_R^{-1} U_R^T X

#ifndef CNMF_LOCATE_HPP
#define CNMF_LOCATE_HPP

#include "cnmf/core.hpp"
#include "cnmf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cnmf {

template <typename Scalar>
struct LocateResult {
  std::vector<Index> indices;       // extraction order
  Matrix<Scalar> extractedColumns;  // N x R, columns of the matrix SPA ran on
};

enum class Locator { spa_conic, spa_preconditioned };

namespace detail {

template <typename Scalar>
void check_rank_request(const Matrix<Scalar>& X, Index R) {
  if (R < 1) throw Error(Stage::locate, "R must be positive");
  if (R > X.cols() || R > X.rows())
    throw Error(Stage::locate, "R = " + std::to_string(R) + " exceeds the dimensions of X");
}

// Greedy index selection only; `X` is consumed as the residual.
template <typename Scalar>
std::vector<Index> spa_indices(Matrix<Scalar> B, Index R) {
  const Scalar floor = Scalar(1e-12) * B.norm();
  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(R));
  for (Index r = 0; r < R; ++r) {
    const Vector<Scalar> sq = B.colwise().squaredNorm().transpose();
    if (!(std::sqrt(sq.sum()) > floor))
      throw Error(Stage::locate, "residual vanished after " + std::to_string(r) + " of " + std::to_string(R) +
                                     " columns (rank of X below R)");
    Index p = 0;
    for (Index j = 1; j < sq.size(); ++j)
      if (sq(j) > sq(p)) p = j;
    const Vector<Scalar> b = B.col(p);
    const RowVector<Scalar> coeff = (b.transpose() * B) / sq(p);
    B.noalias() -= b * coeff;
    picked.push_back(p);
  }
  return picked;
}

template <typename Scalar>
Matrix<Scalar> gather_columns(const Matrix<Scalar>& X, const std::vector<Index>& idx) {
  Matrix<Scalar> out(X.rows(), static_cast<Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out.col(static_cast<Index>(r)) = X.col(idx[r]);
  return out;
}

}  // namespace detail

template <typename Scalar>
LocateResult<Scalar> spa(const Matrix<Scalar>& X, Index R) {
  detail::check_rank_request(X, R);
  LocateResult<Scalar> out;
  out.indices = detail::spa_indices<Scalar>(X, R);
  out.extractedColumns = detail::gather_columns(X, out.indices);
  return out;
}

template <typename Scalar>
LocateResult<Scalar> precond_spa(const Matrix<Scalar>& X, Index R) {
  detail::check_rank_request(X, R);
  Eigen::BDCSVD<Matrix<Scalar>> svd(X, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  if (!(sigma(0) > Scalar(0)) || !(sigma(R - 1) > Scalar(1e-12) * sigma(0)))
    throw Error(Stage::locate, "singular value " + std::to_string(R) + " is below the numerical floor");
  const Matrix<Scalar> whitened =
      sigma.head(R).cwiseInverse().asDiagonal() * svd.matrixU().leftCols(R).transpose() * X;
  LocateResult<Scalar> out;
  out.indices = detail::spa_indices<Scalar>(whitened, R);
  out.extractedColumns = detail::gather_columns(X, out.indices);
  return out;
}

/// Zeroes columns with 1-norm <= t, rescales the survivors to unit 1-norm and
/// runs the chosen locator on the result. `extractedColumns` holds the rescaled
/// located columns.
template <typename Scalar>
LocateResult<Scalar> conic_locate(const Matrix<Scalar>& X, Index R, Scalar t, Locator locator) {
  if (!(t > Scalar(0))) throw Error(Stage::locate, "threshold t must be positive");
  detail::check_rank_request(X, R);
  const Vector<Scalar> norms = column_norms(X, 1);
  Matrix<Scalar> scaled = Matrix<Scalar>::Zero(X.rows(), X.cols());
  Index survivors = 0;
  for (Index j = 0; j < X.cols(); ++j) {
    if (norms(j) > t) {
      scaled.col(j) = X.col(j) / norms(j);
      ++survivors;
    }
  }
  if (survivors < R)
    throw Error(Stage::locate, "only " + std::to_string(survivors) + " columns exceed t = " + std::to_string(t) +
                                   ", need " + std::to_string(R));
  return locator == Locator::spa_conic ? spa(scaled, R) : precond_spa(scaled, R);
}

template <typename Scalar>
LocateResult<Scalar> orcon_spa(const Matrix<Scalar>& X, Index R, Scalar t) {
  return conic_locate(X, R, t, Locator::spa_conic);
}

/// Thresholds ||X[:, p]||_1 - 2 eps for every column p that stay positive,
/// sorted ascending without duplicates.
template <typename Scalar>
std::vector<Scalar> threshold_candidates(const Matrix<Scalar>& X, Scalar epsilonEstimate) {
  if (epsilonEstimate < Scalar(0)) throw Error(Stage::locate, "noise estimate must be nonnegative");
  const Vector<Scalar> norms = column_norms(X, 1);
  std::vector<Scalar> out;
  for (Index j = 0; j < norms.size(); ++j) {
    const Scalar t = norms(j) - Scalar(2) * epsilonEstimate;
    if (t > Scalar(0)) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cnmf

#endif  // CNMF_LOCATE_HPP
