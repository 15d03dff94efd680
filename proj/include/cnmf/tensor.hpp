// Shift-operator algebra, norms, column normalization and the convolutive
// reconstruction. Shifts are index arithmetic; S_tau is never formed.

#ifndef CNMF_TENSOR_HPP
#define CNMF_TENSOR_HPP

#include "cnmf/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace cnmf {

/// M * S_tau: column j of the result is column j - tau of M, the leading tau
/// columns are zero.
template <typename Derived>
Matrix<typename Derived::Scalar> shift_right(const Eigen::MatrixBase<Derived>& M, Index tau) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = Matrix<Scalar>::Zero(M.rows(), M.cols());
  const Index keep = M.cols() - tau;
  if (keep > 0) out.rightCols(keep) = M.leftCols(keep);
  return out;
}

/// M * S_tau^T: column j of the result is column j + tau of M, the trailing
/// tau columns are zero.
template <typename Derived>
Matrix<typename Derived::Scalar> shift_left(const Eigen::MatrixBase<Derived>& M, Index tau) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = Matrix<Scalar>::Zero(M.rows(), M.cols());
  const Index keep = M.cols() - tau;
  if (keep > 0) out.leftCols(keep) = M.rightCols(keep);
  return out;
}

/// Advances a vector by tau places: out_k = v_{k+tau}, zero-padded at the end.
template <typename Derived>
Vector<typename Derived::Scalar> shift_left_vec(const Eigen::MatrixBase<Derived>& v, Index tau) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out = Vector<Scalar>::Zero(v.size());
  const Index keep = v.size() - tau;
  if (keep > 0) out.head(keep) = v.tail(keep);
  return out;
}

/// Delays a vector by tau places: out_k = v_{k-tau}, zero-padded at the
/// front. This is S_tau^T g for a column vector g.
template <typename Derived>
Vector<typename Derived::Scalar> shift_right_vec(const Eigen::MatrixBase<Derived>& v, Index tau) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out = Vector<Scalar>::Zero(v.size());
  const Index keep = v.size() - tau;
  if (keep > 0) out.tail(keep) = v.head(keep);
  return out;
}

/// sum_l W_l H S_{l-1}.
template <typename Scalar>
Matrix<Scalar> reconstruct(const CnmfModel<Scalar>& model) {
  model.check_dimensions();
  const Index T = model.samples();
  Matrix<Scalar> X = Matrix<Scalar>::Zero(model.features(), T);
  for (Index l = 0; l < model.lags(); ++l) {
    const Index keep = T - l;
    if (keep <= 0) break;
    X.rightCols(keep).noalias() += model.W[l] * model.H.leftCols(keep);
  }
  return X;
}

/// Stacks the model into the (V, G) form: V = [W_1 ... W_L], G = [H S_0; ...;
/// H S_{L-1}], with row (l*K + k) of G tagged (k, l).
template <typename Scalar>
BlockFactorization<Scalar> to_block(const CnmfModel<Scalar>& model) {
  model.check_dimensions();
  const Index K = model.components(), L = model.lags();
  BlockFactorization<Scalar> out;
  out.V.resize(model.features(), K * L);
  out.G.resize(K * L, model.samples());
  out.rowMap.reserve(static_cast<std::size_t>(K * L));
  for (Index l = 0; l < L; ++l) {
    out.V.middleCols(l * K, K) = model.W[l];
    out.G.middleRows(l * K, K) = shift_right(model.H, l);
    for (Index k = 0; k < K; ++k) out.rowMap.push_back({k, l});
  }
  return out;
}

/// Per-column p-norm for p in {1, 2}.
template <typename Derived>
Vector<typename Derived::Scalar> column_norms(const Eigen::MatrixBase<Derived>& M, int p) {
  if (p == 1) return M.cwiseAbs().colwise().sum().transpose();
  if (p == 2) return M.colwise().norm().transpose();
  throw Error(Stage::input, "column_norms supports p = 1 or p = 2");
}

/// (max, min) over columns of the column p-norms; zero columns take part in
/// the minimum.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> col_norm_extremes(
    const Eigen::MatrixBase<Derived>& M, int p) {
  if (M.size() == 0) throw Error(Stage::input, "col_norm_extremes on an empty matrix");
  const auto norms = column_norms(M, p);
  return {norms.maxCoeff(), norms.minCoeff()};
}

/// M D_M together with the diagonal of D_M; zero columns keep a zero scale.
template <typename Derived>
std::pair<Matrix<typename Derived::Scalar>, Vector<typename Derived::Scalar>> normalize_columns(
    const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> diag = column_norms(M, 1);
  for (Index j = 0; j < diag.size(); ++j) diag(j) = diag(j) > Scalar(0) ? Scalar(1) / diag(j) : Scalar(0);
  Matrix<Scalar> out = M * diag.asDiagonal();
  return {std::move(out), std::move(diag)};
}

/// ||X - Xhat||_F / ||X||_F.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar rel_error(const Eigen::MatrixBase<DerivedA>& X,
                                    const Eigen::MatrixBase<DerivedB>& Xhat) {
  using Scalar = typename DerivedA::Scalar;
  if (X.rows() != Xhat.rows() || X.cols() != Xhat.cols())
    throw Error(Stage::input, "rel_error shape mismatch");
  const Scalar denom = X.norm();
  if (!(denom > Scalar(0))) throw Error(Stage::input, "relative error of a zero matrix");
  return (X - Xhat).norm() / denom;
}

template <typename Derived>
typename Derived::Scalar rel_mse(const Eigen::MatrixBase<Derived>& X,
                                 const CnmfModel<typename Derived::Scalar>& model) {
  return rel_error(X, reconstruct(model));
}

}  // namespace cnmf

#endif  // CNMF_TENSOR_HPP
