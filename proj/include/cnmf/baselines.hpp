// Iterative CNMF fitters: Frobenius multiplicative updates and alternating
// nonnegative least squares, started from a random scaled model or a given one.

#ifndef CNMF_BASELINES_HPP
#define CNMF_BASELINES_HPP

#include "cnmf/core.hpp"
#include "cnmf/nnls.hpp"
#include "cnmf/random.hpp"
#include "cnmf/report.hpp"
#include "cnmf/tensor.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace cnmf {

struct IterOptions {
  int maxIterations = 100;
  std::uint64_t seed = 0;
  bool recordTrace = true;
  NnlsOptions nnls;
};

template <typename Scalar>
struct FitResult {
  CnmfModel<Scalar> model;
  FitReport report;
};

/// Uniform(0, 1) factors with H rescaled by alpha = <X, Xhat> / <Xhat, Xhat>,
/// the best scalar multiple of the initial reconstruction.
template <typename Scalar>
CnmfModel<Scalar> init_random_scaled(const Matrix<Scalar>& X, Index K, Index L, std::uint64_t seed) {
  if (K < 1 || L < 1) throw Error(Stage::input, "K and L must be positive");
  Philox rng(seed, streams::init);
  CnmfModel<Scalar> model;
  model.W.assign(static_cast<std::size_t>(L), Matrix<Scalar>(X.rows(), K));
  for (auto& w : model.W)
    for (Index k = 0; k < K; ++k)
      for (Index i = 0; i < X.rows(); ++i) w(i, k) = static_cast<Scalar>(rng.uniform());
  model.H.resize(K, X.cols());
  for (Index t = 0; t < X.cols(); ++t)
    for (Index k = 0; k < K; ++k) model.H(k, t) = static_cast<Scalar>(rng.uniform());

  const Matrix<Scalar> Xhat = reconstruct(model);
  const Scalar denom = Xhat.squaredNorm();
  const Scalar alpha = denom > Scalar(0) ? (X.cwiseProduct(Xhat).sum() / denom) : Scalar(0);
  model.H *= std::max(alpha, Scalar(0));
  return model;
}

namespace detail {

template <typename Scalar>
void check_fit_input(const Matrix<Scalar>& X, Index K, Index L, const std::optional<CnmfModel<Scalar>>& init) {
  if (K < 1 || L < 1) throw Error(Stage::input, "K and L must be positive");
  if ((X.array() < Scalar(0)).any()) throw Error(Stage::input, "X has negative entries");
  if (!(X.norm() > Scalar(0))) throw Error(Stage::input, "X is zero");
  if (init) {
    init->check_dimensions();
    if (init->lags() != L || init->components() != K || init->features() != X.rows() || init->samples() != X.cols())
      throw Error(Stage::input, "initial model does not match X, K and L");
  }
}

// factor <- factor .* num ./ max(den, eps * max(den)); skipped if den == 0.
template <typename Scalar>
void multiplicative_step(Matrix<Scalar>& factor, const Matrix<Scalar>& num, const Matrix<Scalar>& den) {
  const Scalar top = den.maxCoeff();
  if (!(top > Scalar(0))) return;
  const Scalar floor = std::numeric_limits<Scalar>::epsilon() * top;
  factor.array() *= num.array() / den.array().max(floor);
}

}  // namespace detail

/// Frobenius multiplicative updates. Each iteration updates all W_l jointly
/// (the Lee-Seung step on V with G fixed), then H with the lag-averaged
/// numerator and denominator,
///   H <- H .* mean_l[shift_left(W_l^T X, l)] ./ mean_l[shift_left(W_l^T Xhat, l)].
template <typename Scalar>
FitResult<Scalar> mult_fit(const Matrix<Scalar>& X, Index K, Index L, const IterOptions& opts,
                           const std::optional<CnmfModel<Scalar>>& init = std::nullopt) {
  detail::check_fit_input(X, K, L, init);
  if (opts.maxIterations < 1) throw Error(Stage::input, "maxIterations must be >= 1");
  Stopwatch sw;
  FitResult<Scalar> out;
  auto& model = out.model;
  model = init ? *init : init_random_scaled(X, K, L, opts.seed);
  const Index T = X.cols();

  Matrix<Scalar> Xhat = reconstruct(model);
  if (opts.recordTrace) out.report.lossTrace.push_back(static_cast<double>(rel_error(X, Xhat)));
  for (int it = 0; it < opts.maxIterations; ++it) {
    std::vector<Matrix<Scalar>> shifted;
    for (Index l = 0; l < L; ++l) shifted.push_back(shift_right(model.H, l));
    for (Index l = 0; l < L; ++l) {
      const Matrix<Scalar> num = X * shifted[l].transpose();
      const Matrix<Scalar> den = Xhat * shifted[l].transpose();
      detail::multiplicative_step(model.W[l], num, den);
    }
    Xhat = reconstruct(model);

    Matrix<Scalar> num = Matrix<Scalar>::Zero(K, T), den = Matrix<Scalar>::Zero(K, T);
    for (Index l = 0; l < L; ++l) {
      num += shift_left(model.W[l].transpose() * X, l);
      den += shift_left(model.W[l].transpose() * Xhat, l);
    }
    detail::multiplicative_step(model.H, num, den);
    Xhat = reconstruct(model);
    if (opts.recordTrace) out.report.lossTrace.push_back(static_cast<double>(rel_error(X, Xhat)));
  }
  out.report.algorithm = "mult";
  out.report.relMse = static_cast<double>(rel_error(X, Xhat));
  out.report.params = {{"K", double(K)}, {"L", double(L)}, {"iterations", double(opts.maxIterations)}};
  out.report.stageSeconds["total"] = sw.seconds();
  return out;
}

/// Gram matrix and cross product of the H-subproblem
///   min_{H >= 0} ||X - sum_l W_l H S_l||_F
/// with the unknown H[k, s] at position s * K + k.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> h_normal_equations(const std::vector<Matrix<Scalar>>& W,
                                                             const Matrix<Scalar>& X) {
  const Index L = static_cast<Index>(W.size()), K = W.front().cols(), T = X.cols();
  std::vector<std::vector<Matrix<Scalar>>> C(static_cast<std::size_t>(L));
  for (Index a = 0; a < L; ++a)
    for (Index b = 0; b < L; ++b) C[a].push_back(W[a].transpose() * W[b]);

  Matrix<Scalar> gram = Matrix<Scalar>::Zero(K * T, K * T);
  for (Index s = 0; s < T; ++s) {
    for (Index s2 = s; s2 < std::min(T, s + L); ++s2) {
      Matrix<Scalar> block = Matrix<Scalar>::Zero(K, K);
      for (Index t = s2; t < std::min(T, s + L); ++t) block += C[t - s][t - s2];
      gram.block(s * K, s2 * K, K, K) = block;
      if (s2 != s) gram.block(s2 * K, s * K, K, K) = block.transpose();
    }
  }

  Matrix<Scalar> b = Matrix<Scalar>::Zero(K, T);
  for (Index l = 0; l < L; ++l) b += shift_left(W[l].transpose() * X, l);
  Matrix<Scalar> cross = Eigen::Map<const Matrix<Scalar>>(b.data(), K * T, 1);
  return {std::move(gram), std::move(cross)};
}

/// Alternating nonnegative least squares with exact subproblem solves: the W
/// step is one NNLS in V = [W_1 .. W_L] against the stacked G, the H step one
/// NNLS over all K T entries of H jointly.
template <typename Scalar>
FitResult<Scalar> anls_fit(const Matrix<Scalar>& X, Index K, Index L, const IterOptions& opts,
                           const std::optional<CnmfModel<Scalar>>& init = std::nullopt) {
  detail::check_fit_input(X, K, L, init);
  if (opts.maxIterations < 1) throw Error(Stage::input, "maxIterations must be >= 1");
  Stopwatch sw;
  FitResult<Scalar> out;
  auto& model = out.model;
  model = init ? *init : init_random_scaled(X, K, L, opts.seed);
  const Index T = X.cols();

  if (opts.recordTrace) out.report.lossTrace.push_back(static_cast<double>(rel_mse(X, model)));
  for (int it = 0; it < opts.maxIterations; ++it) {
    const Matrix<Scalar> G = to_block(model).G;
    const Matrix<Scalar> gramW = G * G.transpose();
    const Matrix<Scalar> crossW = G * X.transpose();
    auto wStep = nnls_solve_normal<Scalar>(gramW, crossW, opts.nnls);
    if (!wStep.converged) throw Error(Stage::fit, "W-step NNLS did not converge");
    for (Index l = 0; l < L; ++l) model.W[l] = wStep.G.middleRows(l * K, K).transpose();

    auto [gramH, crossH] = h_normal_equations(model.W, X);
    auto hStep = nnls_solve_normal<Scalar>(gramH, crossH, opts.nnls);
    if (!hStep.converged) throw Error(Stage::fit, "H-step NNLS did not converge");
    model.H = Eigen::Map<const Matrix<Scalar>>(hStep.G.data(), K, T);
    out.report.nnlsRankDeficient = out.report.nnlsRankDeficient || wStep.rankDeficient || hStep.rankDeficient;
    out.report.nnlsIterations = std::max({out.report.nnlsIterations, wStep.iterations, hStep.iterations});

    if (opts.recordTrace) out.report.lossTrace.push_back(static_cast<double>(rel_mse(X, model)));
  }
  out.report.algorithm = "anls";
  out.report.relMse = static_cast<double>(rel_mse(X, model));
  out.report.params = {{"K", double(K)}, {"L", double(L)}, {"iterations", double(opts.maxIterations)}};
  out.report.stageSeconds["total"] = sw.seconds();
  return out;
}

}  // namespace cnmf

#endif  // CNMF_BASELINES_HPP
