// Locate-Estimate-Cluster-Sort: recover a convolutive factorization from the
// block form V G. Locate the columns of V inside X, estimate G by NNLS, group
// the rows of G into the L shifted copies of each row of H, order each group
// by lag and fold the groups back into (W_1..W_L, H).

#ifndef CNMF_LECS_HPP
#define CNMF_LECS_HPP

#include "cnmf/core.hpp"
#include "cnmf/locate.hpp"
#include "cnmf/nnls.hpp"
#include "cnmf/report.hpp"
#include "cnmf/similarity.hpp"
#include "cnmf/tensor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cnmf {

struct Clustering {
  std::vector<std::vector<Index>> clusters;
};

/// order[l] is the row of G holding lag l.
struct LagOrder {
  std::vector<Index> order;
};

enum class ClusterMethod { greedy, spectral };

struct LecsConfig {
  Index K = 1;
  Index L = 1;
  /// Fixed threshold; when empty the run sweeps `sweep`, or the default
  /// candidate grid if `sweep` is empty too.
  std::optional<double> threshold;
  std::vector<double> sweep;
  std::size_t sweepCap = 32;
  Locator locator = Locator::spa_conic;
  ClusterMethod cluster = ClusterMethod::greedy;
  NnlsOptions nnls;
  /// Rescale the rows of each cluster to a common scale before averaging.
  bool alignRowScales = true;
  std::uint64_t seed = 0;
};

namespace detail {

// Indices of `pool` ordered by descending score, lower index first on ties.
template <typename Scalar, typename Score>
std::vector<Index> rank_by(std::vector<Index> pool, Score score) {
  std::stable_sort(pool.begin(), pool.end(), [&](Index a, Index b) { return score(a) > score(b); });
  return pool;
}

}  // namespace detail

/// Greedy grouping: the lowest available row anchors a cluster and takes the
/// L - 1 available rows most similar to it under cos_L.
template <typename Scalar>
Clustering shift_cluster(const Matrix<Scalar>& G, Index K, Index L) {
  if (G.rows() != K * L) throw Error(Stage::cluster, "G must have K * L rows");
  const Matrix<Scalar> S = shift_similarity_matrix(G, L);
  std::vector<Index> pool(static_cast<std::size_t>(G.rows()));
  std::iota(pool.begin(), pool.end(), Index(0));

  Clustering out;
  for (Index k = 0; k < K; ++k) {
    const Index anchor = pool.front();
    std::vector<Index> rest(pool.begin() + 1, pool.end());
    rest = detail::rank_by<Scalar>(std::move(rest), [&](Index j) { return S(anchor, j); });
    std::vector<Index> cluster{anchor};
    cluster.insert(cluster.end(), rest.begin(), rest.begin() + (L - 1));
    out.clusters.push_back(cluster);
    std::vector<Index> next;
    for (Index j : pool)
      if (std::find(cluster.begin(), cluster.end(), j) == cluster.end()) next.push_back(j);
    pool = std::move(next);
  }
  return out;
}

/// Spectral alternative: keep the K L^2 largest cos_L entries as a 0/1
/// affinity, take its top-K eigenvectors and let each (oriented so its largest
/// magnitude entry is positive) claim its L largest still-unassigned rows.
template <typename Scalar>
Clustering spectral_cluster(const Matrix<Scalar>& G, Index K, Index L) {
  const Index n = G.rows();
  if (n != K * L) throw Error(Stage::cluster, "G must have K * L rows");
  const Matrix<Scalar> S = shift_similarity_matrix(G, L);

  std::vector<Index> entries(static_cast<std::size_t>(n * n));
  std::iota(entries.begin(), entries.end(), Index(0));
  std::stable_sort(entries.begin(), entries.end(),
                   [&](Index a, Index b) { return S(a / n, a % n) > S(b / n, b % n); });
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Index e = 0; e < K * L * L; ++e) M(entries[e] / n, entries[e] % n) = 1.0;
  M = 0.5 * (M + M.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  Clustering out;
  for (Index k = 0; k < K; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(n - 1 - k);
    if (std::abs(v.maxCoeff()) < std::abs(v.minCoeff())) v = -v;
    std::vector<Index> pool;
    for (Index j = 0; j < n; ++j)
      if (!taken[j]) pool.push_back(j);
    pool = detail::rank_by<double>(std::move(pool), [&](Index j) { return v(j); });
    std::vector<Index> cluster(pool.begin(), pool.begin() + L);
    std::sort(cluster.begin(), cluster.end());
    for (Index j : cluster) taken[j] = 1;
    out.clusters.push_back(std::move(cluster));
  }
  return out;
}

/// Orders a cluster by lag with a selection sort over the shift_leq
/// comparator: each step takes the row that is <= the most remaining rows,
/// lowest index on ties.
template <typename Scalar>
LagOrder shift_sort(const Matrix<Scalar>& G, Index L, const std::vector<Index>& cluster) {
  if (static_cast<Index>(cluster.size()) != L) throw Error(Stage::sort, "cluster size differs from L");
  std::vector<Index> remaining = cluster;
  std::sort(remaining.begin(), remaining.end());

  const std::size_t m = remaining.size();
  std::vector<std::vector<char>> leq(m, std::vector<char>(m, 0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) leq[a][b] = a == b || shift_leq(remaining[a], remaining[b], G, L);

  std::vector<std::size_t> slots(m);
  std::iota(slots.begin(), slots.end(), std::size_t(0));
  LagOrder out;
  while (!slots.empty()) {
    std::size_t bestPos = 0;
    int bestVotes = -1;
    for (std::size_t p = 0; p < slots.size(); ++p) {
      int votes = 0;
      for (std::size_t q : slots)
        if (q != slots[p] && leq[slots[p]][q]) ++votes;
      if (votes > bestVotes) {
        bestVotes = votes;
        bestPos = p;
      }
    }
    out.order.push_back(remaining[slots[bestPos]]);
    slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(bestPos));
  }
  return out;
}

/// Folds (V, G) back into W_l and H. W_l[:, k] is the located column for lag
/// l of cluster k; H[k, j] is the mean over the available lags l < min(L, T -
/// j) of G[order_k(l), j + l].
///
/// With `alignRowScales`, row l of a cluster is first rescaled by the least
/// squares factor that maps it (de-shifted) onto the lag-0 row, and the
/// matching column of V by the inverse, so V G is unchanged and rows taken
/// from columns of different norms average coherently.
template <typename Scalar>
CnmfModel<Scalar> assemble_factors(const Matrix<Scalar>& V, const Matrix<Scalar>& G, const Clustering& clustering,
                                   const std::vector<LagOrder>& orders, Index T, bool alignRowScales = true) {
  const Index K = static_cast<Index>(clustering.clusters.size());
  if (K == 0 || static_cast<Index>(orders.size()) != K) throw Error(Stage::assemble, "cluster/order count mismatch");
  const Index L = static_cast<Index>(orders.front().order.size());
  if (V.cols() != G.rows() || G.cols() != T || G.rows() != K * L)
    throw Error(Stage::assemble, "inconsistent V, G and T");

  CnmfModel<Scalar> model;
  model.W.assign(static_cast<std::size_t>(L), Matrix<Scalar>::Zero(V.rows(), K));
  model.H = Matrix<Scalar>::Zero(K, T);

  for (Index k = 0; k < K; ++k) {
    const auto& order = orders[k].order;
    if (static_cast<Index>(order.size()) != L) throw Error(Stage::assemble, "lag orders differ in length");
    std::vector<Scalar> scale(static_cast<std::size_t>(L), Scalar(1));
    if (alignRowScales) {
      const auto ref = G.row(order[0]);
      for (Index l = 1; l < L; ++l) {
        const Index len = T - l;
        if (len <= 0) break;
        const auto shifted = G.row(order[l]).tail(len);
        const Scalar denom = shifted.squaredNorm();
        const Scalar num = ref.head(len).dot(shifted);
        if (denom > Scalar(0) && num > Scalar(0)) scale[l] = num / denom;
      }
    }
    for (Index l = 0; l < L; ++l) model.W[l].col(k) = V.col(order[l]) / scale[l];
    for (Index j = 0; j < T; ++j) {
      const Index a = std::min(L, T - j);
      Scalar sum = 0;
      for (Index l = 0; l < a; ++l) sum += scale[l] * G(order[l], j + l);
      model.H(k, j) = std::max(sum / static_cast<Scalar>(a), Scalar(0));
    }
  }
  return model;
}

/// Default threshold grid: each distinct column 1-norm c, applied as the
/// largest double below c so the column achieving it survives. More than
/// `cap` candidates are thinned to the ones nearest `cap` log-spaced targets.
template <typename Scalar>
std::vector<double> default_sweep(const Matrix<Scalar>& X, std::size_t cap) {
  std::vector<double> cands;
  for (Scalar c : threshold_candidates(X, Scalar(0))) cands.push_back(static_cast<double>(c));
  if (cap > 0 && cands.size() > cap) {
    const double lo = std::log(cands.front()), hi = std::log(cands.back());
    std::vector<double> thinned;
    for (std::size_t i = 0; i < cap; ++i) {
      const double target = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cap - 1);
      auto it = std::lower_bound(cands.begin(), cands.end(), std::exp(target));
      if (it == cands.end()) it = std::prev(it);
      if (it != cands.begin() && std::abs(std::log(*std::prev(it)) - target) < std::abs(std::log(*it) - target))
        it = std::prev(it);
      thinned.push_back(*it);
    }
    std::sort(thinned.begin(), thinned.end());
    thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
    cands = std::move(thinned);
  }
  for (double& c : cands) c = std::nextafter(c, 0.0);
  return cands;
}

template <typename Scalar>
struct LecsRun {
  CnmfModel<Scalar> model;
  FitReport report;
};

namespace detail {

template <typename Scalar>
LecsRun<Scalar> lecs_once(const Matrix<Scalar>& X, const LecsConfig& cfg, double t) {
  const Index K = cfg.K, L = cfg.L, R = K * L;
  LecsRun<Scalar> run;
  auto& rep = run.report;

  Stopwatch sw;
  const auto located = conic_locate(X, R, static_cast<Scalar>(t), cfg.locator);
  rep.stageSeconds["locate"] = sw.seconds();
  rep.locatorIndices = located.indices;

  sw = Stopwatch();
  const auto est = nnls_solve(located.extractedColumns, X, cfg.nnls);
  rep.stageSeconds["estimate"] = sw.seconds();
  if (!est.converged) throw Error(Stage::estimate, "NNLS did not converge at t = " + std::to_string(t));
  rep.nnlsIterations = est.iterations;
  rep.nnlsRankDeficient = est.rankDeficient;

  sw = Stopwatch();
  const Clustering clusters =
      cfg.cluster == ClusterMethod::greedy ? shift_cluster(est.G, K, L) : spectral_cluster(est.G, K, L);
  rep.stageSeconds["cluster"] = sw.seconds();

  sw = Stopwatch();
  std::vector<LagOrder> orders;
  for (const auto& c : clusters.clusters) orders.push_back(shift_sort(est.G, L, c));
  rep.stageSeconds["sort"] = sw.seconds();

  sw = Stopwatch();
  run.model = assemble_factors(located.extractedColumns, est.G, clusters, orders, X.cols(), cfg.alignRowScales);
  rep.stageSeconds["assemble"] = sw.seconds();

  rep.relMse = static_cast<double>(rel_mse(X, run.model));
  rep.chosenT = t;
  return run;
}

}  // namespace detail

/// Full LECS fit. With a fixed threshold this is a single pass; otherwise
/// every threshold of the sweep is tried and the lowest relative error wins
/// (smaller t on ties).
template <typename Scalar>
LecsRun<Scalar> lecs_fit(const Matrix<Scalar>& X, const LecsConfig& cfg) {
  if (cfg.K < 1 || cfg.L < 1) throw Error(Stage::input, "K and L must be positive");
  if (cfg.K * cfg.L > std::min(X.rows(), X.cols()))
    throw Error(Stage::input, "K * L exceeds min(rows, cols) of X");
  if ((X.array() < Scalar(0)).any()) throw Error(Stage::input, "X has negative entries");
  if (!(X.norm() > Scalar(0))) throw Error(Stage::input, "X is zero");

  const char* name = cfg.locator == Locator::spa_conic ? "lecs" : "lecs-pre";
  Stopwatch total;
  LecsRun<Scalar> best;
  if (cfg.threshold) {
    best = detail::lecs_once(X, cfg, *cfg.threshold);
  } else {
    const std::vector<double> grid = cfg.sweep.empty() ? default_sweep(X, cfg.sweepCap) : cfg.sweep;
    if (grid.empty()) throw Error(Stage::locate, "empty threshold sweep");
    std::vector<SweepEntry> trace;
    bool found = false;
    std::string lastError;
    for (double t : grid) {
      try {
        auto run = detail::lecs_once(X, cfg, t);
        trace.push_back({t, run.report.relMse, {}});
        const bool better = !found || run.report.relMse < best.report.relMse ||
                            (run.report.relMse == best.report.relMse && t < *best.report.chosenT);
        if (better) {
          best = std::move(run);
          found = true;
        }
      } catch (const Error& e) {
        trace.push_back({t, std::nullopt, e.what()});
        lastError = e.what();
      }
    }
    if (!found) throw Error(Stage::locate, "every threshold in the sweep failed; last: " + lastError);
    best.report.sweep = std::move(trace);
  }
  best.report.algorithm = name;
  best.report.params["K"] = static_cast<double>(cfg.K);
  best.report.params["L"] = static_cast<double>(cfg.L);
  best.report.stageSeconds["total"] = total.seconds();
  best.report.lossTrace = {best.report.relMse};
  return best;
}

}  // namespace cnmf

#endif  // CNMF_LECS_HPP
