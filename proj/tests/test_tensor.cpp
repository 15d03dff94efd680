#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cnmf/tensor.hpp"
#include "test_util.hpp"

using namespace cnmf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// X[n, t] = sum_k sum_l W_l[n, k] h_k[t - l]: the sum over k of the 2-D
// convolution of the N x L pattern W_{::k} with the row h_k, cropped to T.
MatrixXd convolution_oracle(const CnmfModel<double>& m) {
  const Index N = m.features(), T = m.samples(), K = m.components(), L = m.lags();
  MatrixXd X = MatrixXd::Zero(N, T);
  for (Index k = 0; k < K; ++k)
    for (Index n = 0; n < N; ++n)
      for (Index t = 0; t < T; ++t)
        for (Index l = 0; l < L; ++l)
          if (t - l >= 0) X(n, t) += m.W[l](n, k) * m.H(k, t - l);
  return X;
}

}  // namespace

TEST_CASE("shift_right examples") {
  MatrixXd M(2, 3);
  M << 1, 2, 3, 4, 5, 6;
  MatrixXd expected(2, 3);
  expected << 0, 1, 2, 0, 4, 5;
  CHECK(shift_right(M, 1) == expected);
  CHECK(shift_right(M, 0) == M);
  CHECK(shift_right(M, 3).isZero(0));
  CHECK(shift_right(M, 7).isZero(0));
}

TEST_CASE("shift_left_vec examples") {
  VectorXd v(4);
  v << 1, 2, 3, 4;
  VectorXd expected(4);
  expected << 2, 3, 4, 0;
  CHECK(shift_left_vec(v, 1) == expected);
  CHECK(shift_left_vec(v, 0) == v);
  VectorXd w(3);
  w << 5, 0, 0;
  CHECK(shift_left_vec(w, 3).isZero(0));
}

TEST_CASE("shift_left_vec undoes shift_right_vec on the interior") {
  Philox rng(3, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd v = test::random_matrix(rng, 9, 1);
    const Index tau = test::random_index(rng, 0, 9);
    const VectorXd back = shift_left_vec(shift_right_vec(v, tau), tau);
    CHECK(back.head(9 - tau) == v.head(9 - tau));
  }
}

TEST_CASE("shifts compose additively") {
  Philox rng(1, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd M = test::random_matrix(rng, 3, 8);
    const Index a = test::random_index(rng, 0, 9), b = test::random_index(rng, 0, 9);
    CHECK(shift_right(M, a + b) == shift_right(shift_right(M, a), b));
  }
}

TEST_CASE("reconstruct examples") {
  CnmfModel<double> nmf;
  nmf.W = {MatrixXd{{2}, {3}}};
  nmf.H = MatrixXd{{1, 0, 4}};
  CHECK(reconstruct(nmf) == MatrixXd{{2, 0, 8}, {3, 0, 12}});

  CnmfModel<double> two;
  two.W = {MatrixXd{{1}, {0}}, MatrixXd{{0}, {1}}};
  two.H = MatrixXd{{1, 0, 0}};
  CHECK(reconstruct(two) == MatrixXd{{1, 0, 0}, {0, 1, 0}});
}

TEST_CASE("reconstruct matches the 2-D convolution oracle") {
  Philox rng(7, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index N = test::random_index(rng, 1, 6), T = test::random_index(rng, 1, 6);
    const Index K = test::random_index(rng, 1, 6), L = test::random_index(rng, 1, 6);
    const auto model = test::random_model(rng, N, T, K, L);
    CHECK((reconstruct(model) - convolution_oracle(model)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("reconstruct with one lag is the matrix product") {
  Philox rng(8, 0);
  const auto model = test::random_model(rng, 7, 11, 3, 1);
  CHECK((reconstruct(model) - model.W[0] * model.H).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("reconstruct rejects mismatched blocks") {
  CnmfModel<double> bad;
  bad.W = {MatrixXd::Ones(2, 2), MatrixXd::Ones(3, 2)};
  bad.H = MatrixXd::Ones(2, 4);
  CHECK_THROWS_AS(reconstruct(bad), Error);
  bad.W = {MatrixXd::Ones(2, 3)};
  CHECK_THROWS_AS(reconstruct(bad), Error);
}

TEST_CASE("block form reproduces the convolutive sum") {
  Philox rng(9, 0);
  const auto model = test::random_model(rng, 5, 12, 2, 3);
  const auto block = to_block(model);
  CHECK(block.V.cols() == 6);
  CHECK(block.G.rows() == 6);
  CHECK((block.V * block.G - reconstruct(model)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(block.rowMap[4] == RowTag{0, 2});
}

TEST_CASE("col_norm_extremes examples") {
  CHECK(col_norm_extremes(MatrixXd{{3, 0}, {4, 0}}, 2) == std::pair{5.0, 0.0});
  CHECK(col_norm_extremes(MatrixXd::Identity(2, 2), 1) == std::pair{1.0, 1.0});
  CHECK(col_norm_extremes(MatrixXd{{1, 2}, {1, 2}}, 1) == std::pair{4.0, 2.0});
  CHECK_THROWS_AS(col_norm_extremes(MatrixXd(0, 0), 1), Error);
}

TEST_CASE("normalize_columns") {
  auto [M, d] = normalize_columns(MatrixXd{{2}, {2}});
  CHECK(M == MatrixXd{{0.5}, {0.5}});
  CHECK(d(0) == 0.25);

  auto [Z, dz] = normalize_columns(MatrixXd{{0, 1}, {0, 3}});
  CHECK(Z.col(0).isZero(0));
  CHECK(dz(0) == 0.0);

  const MatrixXd unit{{0.25, 1.0}, {0.75, 0.0}};
  CHECK(normalize_columns(unit).first == unit);

  Philox rng(10, 0);
  MatrixXd R = test::random_matrix(rng, 6, 9);
  R.col(4).setZero();
  auto [Rn, dr] = normalize_columns(R);
  for (Index j = 0; j < R.cols(); ++j) {
    if (dr(j) == 0) continue;
    CHECK(Rn.col(j).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((Rn.col(j) / dr(j) - R.col(j)).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("rel_mse examples") {
  Philox rng(11, 0);
  const auto model = test::random_model(rng, 4, 6, 2, 2);
  const MatrixXd X = reconstruct(model);
  CHECK(rel_mse(X, model) == 0.0);

  auto zero = model;
  zero.H.setZero();
  CHECK(rel_mse(X, zero) == doctest::Approx(1.0));

  const MatrixXd row{{3, 4}};
  CHECK(rel_error(row, MatrixXd{{0, 0}}) == doctest::Approx(1.0));
  CHECK(rel_error(row, MatrixXd{{3, 0}}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(rel_error(MatrixXd::Zero(2, 2), MatrixXd::Ones(2, 2)), Error);
}
