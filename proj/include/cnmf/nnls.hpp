// Nonnegative least squares min_{G >= 0} ||A G - B||_F by block principal
// pivoting on the normal equations (Kim & Park 2011), one right-hand side at a
// time against a shared Gram matrix.

#ifndef CNMF_NNLS_HPP
#define CNMF_NNLS_HPP

#include "cnmf/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cnmf {

struct NnlsOptions {
  /// 0 selects the default 5 * n + 10, n the number of unknowns per column.
  int maxOuterIterations = 0;
  /// Relative to ||A^T B||_inf.
  double kktTolerance = 1e-10;
  /// Back off from full exchange to single exchange after repeated failures to
  /// shrink the infeasible set.
  bool fallback = true;
};

template <typename Scalar>
struct NnlsResult {
  Matrix<Scalar> G;
  int iterations = 0;  // worst column
  bool converged = true;
  bool rankDeficient = false;
};

namespace detail {

template <typename Scalar>
struct PassiveSolve {
  Vector<Scalar> x;
  bool rankDeficient = false;
};

template <typename Scalar>
PassiveSolve<Scalar> solve_passive(const Matrix<Scalar>& gram, const Vector<Scalar>& rhs,
                                   const std::vector<Index>& passive) {
  const Index n = gram.rows();
  const Index m = static_cast<Index>(passive.size());
  PassiveSolve<Scalar> out{Vector<Scalar>::Zero(n), false};
  if (m == 0) return out;
  Matrix<Scalar> sub(m, m);
  Vector<Scalar> b(m);
  for (Index i = 0; i < m; ++i) {
    b(i) = rhs(passive[i]);
    for (Index j = 0; j < m; ++j) sub(i, j) = gram(passive[i], passive[j]);
  }
  Eigen::LLT<Matrix<Scalar>> llt(sub);
  Vector<Scalar> xs;
  if (llt.info() == Eigen::Success) {
    xs = llt.solve(b);
  } else {
    out.rankDeficient = true;
    xs = sub.completeOrthogonalDecomposition().solve(b);
  }
  for (Index i = 0; i < m; ++i) out.x(passive[i]) = xs(i);
  return out;
}

}  // namespace detail

/// Solves one column of the normal-equation form min 1/2 x^T Q x - b^T x,
/// x >= 0, with `gradTol` the absolute gradient tolerance. Returns the
/// number of exchange iterations.
template <typename Scalar>
int nnls_column(const Matrix<Scalar>& gram, const Vector<Scalar>& rhs, Scalar gradTol,
                const NnlsOptions& opts, Vector<Scalar>& x, bool& converged, bool& rankDeficient) {
  const Index n = gram.rows();
  const int maxIter = opts.maxOuterIterations > 0 ? opts.maxOuterIterations : static_cast<int>(5 * n + 10);

  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  x = Vector<Scalar>::Zero(n);
  Vector<Scalar> y = -rhs;
  Vector<Scalar> best = x;
  Index bestInfeasible = n + 1;

  Index backupBudget = 3;
  Index fewestInfeasible = n + 1;
  converged = false;
  int iter = 0;
  for (; iter <= maxIter; ++iter) {
    std::vector<Index> infeasible;
    for (Index i = 0; i < n; ++i) {
      const bool bad = passive[i] ? x(i) < Scalar(0) : y(i) < -gradTol;
      if (bad) infeasible.push_back(i);
    }
    const Index count = static_cast<Index>(infeasible.size());
    if (count < bestInfeasible) {
      bestInfeasible = count;
      best = x;
    }
    if (count == 0) {
      converged = true;
      break;
    }
    if (iter == maxIter) break;

    if (count < fewestInfeasible) {
      fewestInfeasible = count;
      backupBudget = 3;
      for (Index i : infeasible) passive[i] = !passive[i];
    } else if (backupBudget >= 1 || !opts.fallback) {
      --backupBudget;
      for (Index i : infeasible) passive[i] = !passive[i];
    } else {
      const Index i = infeasible.back();
      passive[i] = !passive[i];
    }

    std::vector<Index> set;
    for (Index i = 0; i < n; ++i)
      if (passive[i]) set.push_back(i);
    auto solved = detail::solve_passive(gram, rhs, set);
    rankDeficient = rankDeficient || solved.rankDeficient;
    x = std::move(solved.x);
    y = gram * x - rhs;
    for (Index i : set) y(i) = Scalar(0);
  }
  if (!converged) x = best;
  x = x.cwiseMax(Scalar(0));
  return iter;
}

/// NNLS given the Gram matrix A^T A and the cross product A^T B directly.
template <typename Scalar>
NnlsResult<Scalar> nnls_solve_normal(const Matrix<Scalar>& gram, const Matrix<Scalar>& cross,
                                     const NnlsOptions& opts = {}) {
  if (gram.rows() != gram.cols() || gram.rows() != cross.rows())
    throw Error(Stage::estimate, "nnls: Gram and cross-product shapes disagree");
  if (!(opts.kktTolerance > 0)) throw Error(Stage::estimate, "nnls: kktTolerance must be positive");

  NnlsResult<Scalar> out;
  out.G = Matrix<Scalar>::Zero(cross.rows(), cross.cols());
  const Scalar scale = cross.size() > 0 ? cross.cwiseAbs().maxCoeff() : Scalar(0);
  if (!(scale > Scalar(0))) return out;
  const Scalar gradTol = static_cast<Scalar>(opts.kktTolerance) * scale;

  Vector<Scalar> x;
  for (Index c = 0; c < cross.cols(); ++c) {
    bool converged = false;
    bool rankDeficient = false;
    const Vector<Scalar> rhs = cross.col(c);
    const int it = nnls_column(gram, rhs, gradTol, opts, x, converged, rankDeficient);
    out.G.col(c) = x;
    out.iterations = std::max(out.iterations, it);
    out.converged = out.converged && converged;
    out.rankDeficient = out.rankDeficient || rankDeficient;
  }
  return out;
}

template <typename DerivedA, typename DerivedB>
NnlsResult<typename DerivedA::Scalar> nnls_solve(const Eigen::MatrixBase<DerivedA>& A,
                                                 const Eigen::MatrixBase<DerivedB>& B,
                                                 const NnlsOptions& opts = {}) {
  using Scalar = typename DerivedA::Scalar;
  if (A.rows() != B.rows()) throw Error(Stage::estimate, "nnls: A and B row counts differ");
  const Matrix<Scalar> gram = A.transpose() * A;
  const Matrix<Scalar> cross = A.transpose() * B;
  return nnls_solve_normal<Scalar>(gram, cross, opts);
}

/// Largest KKT violation of G for the normal-equation problem, relative to
/// ||A^T B||_inf: |grad| on the support of G, max(-grad, 0) off it, and any
/// negative entry of G.
template <typename Scalar>
Scalar kkt_violation(const Matrix<Scalar>& gram, const Matrix<Scalar>& cross, const Matrix<Scalar>& G) {
  const Scalar scale = cross.size() > 0 ? cross.cwiseAbs().maxCoeff() : Scalar(0);
  const Matrix<Scalar> grad = gram * G - cross;
  Scalar worst = 0;
  for (Index j = 0; j < G.cols(); ++j) {
    for (Index i = 0; i < G.rows(); ++i) {
      Scalar v;
      if (G(i, j) < Scalar(0)) v = -G(i, j);
      else if (G(i, j) > Scalar(0)) v = std::abs(grad(i, j));
      else v = std::max(-grad(i, j), Scalar(0));
      worst = std::max(worst, v);
    }
  }
  return scale > Scalar(0) ? worst / scale : worst;
}

}  // namespace cnmf

#endif  // CNMF_NNLS_HPP
