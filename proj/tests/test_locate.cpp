#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cnmf/locate.hpp"
#include "cnmf/synth.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace cnmf;
using Eigen::MatrixXd;

namespace {

struct Separable {
  MatrixXd X;
  MatrixXd V;
  std::vector<Index> vertexColumns;  // vertexColumns[r] holds V[:, r] (scaled)
};

// X = V [D M] Pi with D positive diagonal (`scales`) and mixing columns of
// M with 1-norm `mixNorm`.
Separable make_separable(Philox& rng, Index N, Index R, Index T, const Eigen::VectorXd& scales, double mixNorm) {
  Separable s;
  s.V = test::random_matrix(rng, N, R);
  MatrixXd G = MatrixXd::Zero(R, T);
  G.leftCols(R) = scales.asDiagonal();
  for (Index j = R; j < T; ++j) {
    G.col(j) = test::random_matrix(rng, R, 1, 0.05, 1.0);
    G.col(j) *= mixNorm / G.col(j).sum();
  }
  std::vector<Index> perm(static_cast<std::size_t>(T));
  std::iota(perm.begin(), perm.end(), Index(0));
  for (Index i = T - 1; i > 0; --i) std::swap(perm[i], perm[test::random_index(rng, 0, i)]);
  MatrixXd X(N, T);
  s.vertexColumns.resize(static_cast<std::size_t>(R));
  for (Index j = 0; j < T; ++j) {
    X.col(perm[j]) = s.V * G.col(j);
    if (j < R) s.vertexColumns[j] = perm[j];
  }
  s.X = X;
  return s;
}

std::set<Index> as_set(const std::vector<Index>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("spa examples") {
  const MatrixXd X{{1, 0, 0.5}, {0, 1, 0.5}};
  CHECK(as_set(spa(X, 2).indices) == std::set<Index>{0, 1});

  const auto id = spa<double>(MatrixXd::Identity(4, 4), 4);
  CHECK(as_set(id.indices) == std::set<Index>{0, 1, 2, 3});
  CHECK(id.indices.front() == 0);  // ties go to the lowest index

  MatrixXd dup{{1, 0, 0.3, 1}, {0, 1, 0.3, 0}, {0, 0, 0.4, 0}};
  const auto d = as_set(spa(dup, 3).indices);
  CHECK(d.count(0) + d.count(3) == 1);
}

TEST_CASE("spa errors") {
  const MatrixXd rank1 = Eigen::VectorXd::LinSpaced(4, 1, 4) * Eigen::RowVectorXd::LinSpaced(5, 1, 5);
  CHECK_THROWS_AS(spa(rank1, 2), Error);
  CHECK_THROWS_AS(spa<double>(MatrixXd::Identity(3, 3), 4), Error);
  CHECK_THROWS_AS(spa<double>(MatrixXd::Identity(3, 3), 0), Error);
}

TEST_CASE("spa finds the vertex set of convex separable data") {
  Philox rng(1, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index R = test::random_index(rng, 2, 6);
    const auto s = make_separable(rng, 10, R, 40, Eigen::VectorXd::Ones(R), 1.0);
    CHECK(as_set(spa(s.X, R).indices) == as_set(s.vertexColumns));
  }
}

TEST_CASE("spa is invariant to shrinking interior columns") {
  Philox rng(2, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index R = 4;
    const auto s = make_separable(rng, 8, R, 30, Eigen::VectorXd::Ones(R), 0.9);
    MatrixXd scaled = s.X;
    const auto vertices = as_set(s.vertexColumns);
    for (Index j = 0; j < scaled.cols(); ++j)
      if (!vertices.count(j)) scaled.col(j) *= rng.uniform(0.2, 1.1);
    CHECK(as_set(spa(scaled, R).indices) == as_set(spa(s.X, R).indices));
  }
}

TEST_CASE("orcon_spa recovers scaled vertices of conic data") {
  Philox rng(3, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index R = test::random_index(rng, 2, 5);
    const Eigen::VectorXd scales = test::random_matrix(rng, R, 1, 0.5, 3.0);
    MatrixXd s_X;
    auto s = make_separable(rng, 10, R, 50, scales, 1.0);
    // rescale every non-vertex column arbitrarily: X is in the cone of V
    const auto vertices = as_set(s.vertexColumns);
    for (Index j = 0; j < s.X.cols(); ++j)
      if (!vertices.count(j)) s.X.col(j) *= rng.uniform(0.1, 5.0);

    const MatrixXd VA = s.V * scales.asDiagonal();
    const double minNorm = col_norm_extremes(VA, 1).second;
    for (double frac : {0.01, 0.5, 0.99}) {
      const auto r = orcon_spa(s.X, R, frac * minNorm);
      CHECK(as_set(r.indices) == vertices);
      const auto normalized = normalize_columns(VA).first;
      for (std::size_t c = 0; c < r.indices.size(); ++c) {
        const Index vertex = std::find(s.vertexColumns.begin(), s.vertexColumns.end(), r.indices[c]) -
                             s.vertexColumns.begin();
        CHECK((r.extractedColumns.col(static_cast<Index>(c)) - normalized.col(vertex)).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("orcon_spa thresholding") {
  const MatrixXd X{{1, 0, 0.005}, {0, 1, 0.005}};
  CHECK_THROWS_AS(orcon_spa(X, 2, 5.0), Error);
  CHECK_THROWS_AS(orcon_spa(X, 2, 0.0), Error);
  const auto r = orcon_spa(X, 2, 0.1);
  CHECK(as_set(r.indices) == std::set<Index>{0, 1});
}

TEST_CASE("precond_spa") {
  CHECK(as_set(precond_spa<double>(MatrixXd::Identity(3, 3), 3).indices) == std::set<Index>{0, 1, 2});
  const MatrixXd rank1 = Eigen::VectorXd::LinSpaced(4, 1, 4) * Eigen::RowVectorXd::LinSpaced(5, 1, 5);
  CHECK_THROWS_AS(precond_spa(rank1, 2), Error);

  Philox rng(4, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = make_separable(rng, 12, 5, 40, Eigen::VectorXd::Ones(5), 1.0);
    CHECK(as_set(precond_spa(s.X, 5).indices) == as_set(spa(s.X, 5).indices));
  }
}

TEST_CASE("both locators pick one copy of every V column on generated instances") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig cfg;
    cfg.N = 30;
    cfg.T = 120;
    cfg.K = 2;
    cfg.L = 4;
    cfg.seed = seed;
    const auto gt = gen_separable<double>(cfg);
    const MatrixXd Vn = normalize_columns(to_block(gt.model).V).first;
    for (Locator loc : {Locator::spa_conic, Locator::spa_preconditioned}) {
      const auto r = conic_locate<double>(gt.X, 8, 1e-9, loc);
      std::set<Index> matched;
      for (Index c = 0; c < 8; ++c) {
        const Eigen::VectorXd col = r.extractedColumns.col(c);
        for (Index v = 0; v < 8; ++v)
          if ((Vn.col(v) - col).cwiseAbs().maxCoeff() <= 1e-12) matched.insert(v);
      }
      CHECK(matched.size() == 8);
    }
  }
}

TEST_CASE("threshold_candidates") {
  MatrixXd X(1, 3);
  X << 5, 3, 3;
  CHECK(threshold_candidates(X, 0.5) == std::vector<double>{2, 4});
  CHECK(threshold_candidates(X, 0.0) == std::vector<double>{3, 5});
  CHECK(threshold_candidates(X, 10.0).empty());
  CHECK_THROWS_AS(threshold_candidates(X, -1.0), Error);
}
