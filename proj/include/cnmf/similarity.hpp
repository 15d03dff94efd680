// Shift-invariant cosine similarity between rows of G, the shift-direction
// comparator used to order a cluster, and the permutation-matched score.

#ifndef CNMF_SIMILARITY_HPP
#define CNMF_SIMILARITY_HPP

#include "cnmf/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace cnmf {

/// x^T y / (||x|| ||y||), with the cosine against a zero vector taken as 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar nx = x.norm(), ny = y.norm();
  if (!(nx > Scalar(0)) || !(ny > Scalar(0))) return Scalar(0);
  return x.dot(y) / (nx * ny);
}

/// cos(S_lag^T a, b) for lag >= 0, where S_lag^T a delays a by `lag` places.
/// Only the overlapping part of the delayed vector survives the shift.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar delayed_cosine(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b, Index lag) {
  using Scalar = typename DerivedA::Scalar;
  const Index keep = a.size() - lag;
  if (keep <= 0) return Scalar(0);
  const Scalar na = a.head(keep).norm(), nb = b.norm();
  if (!(na > Scalar(0)) || !(nb > Scalar(0))) return Scalar(0);
  return a.head(keep).dot(b.tail(keep)) / (na * nb);
}

struct ShiftSimilarity {
  double value = 0;
  /// Positive when the second vector is a right shift (delay) of the first.
  Index bestLag = 0;
};

/// L-shift cosine similarity: the best cosine over relative delays of either
/// vector by fewer than L places. Ties go to the smaller |lag|, positive first.
template <typename DerivedA, typename DerivedB>
ShiftSimilarity cos_shift(const Eigen::MatrixBase<DerivedA>& gi, const Eigen::MatrixBase<DerivedB>& gj, Index L) {
  if (gi.size() != gj.size()) throw Error(Stage::cluster, "cos_shift on vectors of different length");
  if (L < 1) throw Error(Stage::cluster, "cos_shift requires L >= 1");
  ShiftSimilarity best{static_cast<double>(cosine(gi, gj)), 0};
  for (Index l = 1; l < L; ++l) {
    const double forward = static_cast<double>(delayed_cosine(gi, gj, l));
    if (forward > best.value) best = {forward, l};
    const double backward = static_cast<double>(delayed_cosine(gj, gi, l));
    if (backward > best.value) best = {backward, -l};
  }
  return best;
}

/// Pairwise cos_L over the rows of G.
template <typename Scalar>
Matrix<Scalar> shift_similarity_matrix(const Matrix<Scalar>& G, Index L) {
  const Index n = G.rows();
  Matrix<Scalar> S(n, n);
  for (Index i = 0; i < n; ++i) {
    S(i, i) = static_cast<Scalar>(cos_shift(G.row(i).transpose(), G.row(i).transpose(), L).value);
    for (Index j = i + 1; j < n; ++j) {
      S(i, j) = S(j, i) = static_cast<Scalar>(cos_shift(G.row(i).transpose(), G.row(j).transpose(), L).value);
    }
  }
  return S;
}

/// i <= j when row j reads better as a delayed copy of row i than row i does
/// as a delayed copy of row j.
template <typename Scalar>
bool shift_leq(Index i, Index j, const Matrix<Scalar>& G, Index L) {
  if (i < 0 || j < 0 || i >= G.rows() || j >= G.rows()) throw Error(Stage::sort, "shift_leq row index out of range");
  const auto gi = G.row(i).transpose();
  const auto gj = G.row(j).transpose();
  Scalar left = std::numeric_limits<Scalar>::lowest();
  Scalar right = std::numeric_limits<Scalar>::lowest();
  for (Index l = 0; l < L; ++l) {
    left = std::max(left, delayed_cosine(gi, gj, l));
    right = std::max(right, delayed_cosine(gj, gi, l));
  }
  return left >= right;
}

struct Assignment {
  double score = 0;
  /// permutation[k] is the column matched to row k.
  std::vector<Index> permutation;
};

namespace detail {

// Hungarian method, minimizing cost; O(n^3).
inline std::vector<Index> hungarian_min(const Eigen::MatrixXd& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<Index> perm(n);
  for (Index j = 1; j <= n; ++j) perm[match[j] - 1] = j - 1;
  return perm;
}

}  // namespace detail

/// Maximum-weight perfect matching on a square score matrix; exhaustive up to
/// 8 rows (first lexicographic optimum wins), Hungarian method above.
inline Assignment best_assignment(const Eigen::MatrixXd& C) {
  const Index n = C.rows();
  if (C.cols() != n) throw Error(Stage::input, "best_assignment needs a square matrix");
  Assignment out;
  if (n == 0) return out;
  if (n <= 8) {
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index(0));
    double best = -std::numeric_limits<double>::infinity();
    do {
      double s = 0;
      for (Index k = 0; k < n; ++k) s += C(k, perm[k]);
      if (s > best) {
        best = s;
        out.permutation = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    out.permutation = detail::hungarian_min(-C);
  }
  double s = 0;
  for (Index k = 0; k < n; ++k) s += C(k, out.permutation[k]);
  out.score = s / static_cast<double>(n);
  return out;
}

/// Mean row cosine between H and Htilde under the best row matching.
template <typename Scalar>
Assignment perm_score(const Matrix<Scalar>& H, const Matrix<Scalar>& Htilde) {
  if (H.rows() != Htilde.rows() || H.cols() != Htilde.cols())
    throw Error(Stage::input, "perm_score shape mismatch");
  const Index K = H.rows();
  Eigen::MatrixXd C(K, K);
  for (Index a = 0; a < K; ++a)
    for (Index b = 0; b < K; ++b)
      C(a, b) = static_cast<double>(cosine(H.row(a).transpose(), Htilde.row(b).transpose()));
  return best_assignment(C);
}

}  // namespace cnmf

#endif  // CNMF_SIMILARITY_HPP
