// Ground-truth generator for convolutive-separable instances and the three
// additive noise models of the synthetic benchmark.

#ifndef CNMF_SYNTH_HPP
#define CNMF_SYNTH_HPP

#include "cnmf/core.hpp"
#include "cnmf/random.hpp"
#include "cnmf/similarity.hpp"
#include "cnmf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cnmf {

struct SynthConfig {
  Index N = 100;
  Index T = 250;
  Index K = 3;
  Index L = 5;
  double p = 0.75;  // probability that an entry of H is zero before anchoring
  std::uint64_t seed = 1;

  /// Anchor positions are kept at least this far apart.
  Index anchorGap() const { return 3 * L + 2; }

  void validate() const {
    if (N < 1 || T < 1 || K < 1 || L < 1) throw Error(Stage::generate, "N, T, K, L must be positive");
    if (!(p >= 0.0 && p < 1.0)) throw Error(Stage::generate, "sparsity p must lie in [0, 1)");
    if (N < K * L) throw Error(Stage::generate, "N < K * L: V cannot have full column rank");
    if ((2 * K - 1) * anchorGap() > T - L)
      throw Error(Stage::generate, "T too small to place " + std::to_string(2 * K) + " anchors " +
                                       std::to_string(anchorGap()) + " apart");
  }
};

enum class NoiseKind { uniform, gaussian, exponential };

inline const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::exponential: return "exponential";
  }
  return "unknown";
}

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "uniform") return NoiseKind::uniform;
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "exponential") return NoiseKind::exponential;
  throw Error(Stage::input, "unknown noise kind '" + s + "'");
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::uniform;
  double beta = 1e-3;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct GroundTruth {
  CnmfModel<Scalar> model;
  Matrix<Scalar> X;
  /// (t_k, s_k): H[k, t_k] anchors the first half of the lags, H[k, s_k] the rest.
  std::vector<std::pair<Index, Index>> anchors;
  /// Column of X equal to a positive multiple of V[:, l * K + k], in block-row order.
  std::vector<Index> separabilityColumns;
  double delta = 0;
  double sigmaMinV = 0;
  int attempts = 0;
};

/// 1 - (largest cos_{2L} between distinct rows of H, or between two distinct
/// delays < L of the same row).
template <typename Scalar>
double sequential_uniqueness_margin(const Matrix<Scalar>& H, Index L) {
  double worst = -1.0;
  const Index K = H.rows();
  for (Index i = 0; i < K; ++i) {
    const Vector<Scalar> hi = H.row(i).transpose();
    for (Index j = i + 1; j < K; ++j) worst = std::max(worst, cos_shift(hi, H.row(j).transpose(), 2 * L).value);
    for (Index a = 0; a < L; ++a)
      for (Index b = a + 1; b < L; ++b)
        worst = std::max(worst, static_cast<double>(cosine(shift_right_vec(hi, a), shift_right_vec(hi, b))));
  }
  return 1.0 - worst;
}

namespace detail {

inline std::vector<Index> draw_anchor_positions(Philox& rng, const SynthConfig& cfg) {
  const Index count = 2 * cfg.K;
  const auto range = static_cast<std::uint64_t>(cfg.T - cfg.L + 1);
  for (int retry = 0; retry < 1000; ++retry) {
    std::vector<Index> pos(static_cast<std::size_t>(count));
    for (auto& p : pos) p = static_cast<Index>(rng.below(range));
    std::vector<Index> sorted = pos;
    std::sort(sorted.begin(), sorted.end());
    bool ok = true;
    for (std::size_t i = 1; i < sorted.size() && ok; ++i) ok = sorted[i] - sorted[i - 1] >= cfg.anchorGap();
    if (ok) return pos;
  }
  throw Error(Stage::generate, "could not place non-overlapping anchor windows in 1000 tries");
}

}  // namespace detail

/// Draws W_l ~ U(0.5, 1.5), H ~ U(0, 1) * Bern(1 - p), then for every k
/// clears the windows [t_k - L, t_k + L/2] and [s_k - L/2, s_k + L] in all
/// rows of H and sets H[k, t_k], H[k, s_k] ~ U(0.5, 1.5). Draws whose margin
/// delta <= 1e-3 or whose sigma_min(V) <= 1e-8 are discarded and redrawn.
template <typename Scalar = double>
GroundTruth<Scalar> gen_separable(const SynthConfig& cfg, int maxAttempts = 100) {
  cfg.validate();
  const Index N = cfg.N, T = cfg.T, K = cfg.K, L = cfg.L, half = cfg.L / 2;
  for (int attempt = 0; attempt < maxAttempts; ++attempt) {
    Philox rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(attempt)), streams::instance);
    GroundTruth<Scalar> gt;
    gt.attempts = attempt + 1;
    auto& model = gt.model;
    model.W.assign(static_cast<std::size_t>(L), Matrix<Scalar>(N, K));
    for (auto& w : model.W)
      for (Index k = 0; k < K; ++k)
        for (Index i = 0; i < N; ++i) w(i, k) = static_cast<Scalar>(rng.uniform(0.5, 1.5));
    model.H.resize(K, T);
    for (Index k = 0; k < K; ++k) {
      for (Index t = 0; t < T; ++t) {
        const double u = rng.uniform();
        const bool on = rng.bernoulli(1.0 - cfg.p);
        model.H(k, t) = on ? static_cast<Scalar>(u) : Scalar(0);
      }
    }

    const auto pos = detail::draw_anchor_positions(rng, cfg);
    auto clear = [&](Index from, Index to) {
      for (Index t = std::max<Index>(from, 0); t <= std::min<Index>(to, T - 1); ++t) model.H.col(t).setZero();
    };
    for (Index k = 0; k < K; ++k) {
      const Index tk = pos[2 * k], sk = pos[2 * k + 1];
      gt.anchors.emplace_back(tk, sk);
      clear(tk - L, tk + half);
      clear(sk - half, sk + L);
    }
    for (Index k = 0; k < K; ++k) {
      model.H(k, gt.anchors[k].first) = static_cast<Scalar>(rng.uniform(0.5, 1.5));
      model.H(k, gt.anchors[k].second) = static_cast<Scalar>(rng.uniform(0.5, 1.5));
    }
    gt.X = reconstruct(model);

    gt.separabilityColumns.resize(static_cast<std::size_t>(K * L));
    for (Index l = 0; l < L; ++l) {
      for (Index k = 0; k < K; ++k) {
        const Index anchor = l <= half ? gt.anchors[k].first : gt.anchors[k].second;
        const Index col = anchor + l;
        const Vector<Scalar> expected = model.W[l].col(k) * model.H(k, anchor);
        if ((gt.X.col(col) - expected).norm() > Scalar(1e-12) * expected.norm())
          throw Error(Stage::generate, "separability check failed");
        gt.separabilityColumns[l * K + k] = col;
      }
    }

    gt.delta = sequential_uniqueness_margin(model.H, L);
    const Matrix<Scalar> V = to_block(model).V;
    gt.sigmaMinV = static_cast<double>(Eigen::JacobiSVD<Matrix<Scalar>>(V).singularValues().minCoeff());
    if (gt.delta > 1e-3 && gt.sigmaMinV > 1e-8) return gt;
  }
  throw Error(Stage::generate, "no admissible instance in " + std::to_string(maxAttempts) + " attempts");
}

/// X + E with E drawn from the chosen model; the Gaussian model clamps E at
/// -X so the result stays nonnegative.
template <typename Scalar>
Matrix<Scalar> add_noise(const Matrix<Scalar>& X, const NoiseSpec& spec) {
  if (!(spec.beta > 0)) throw Error(Stage::generate, "noise beta must be positive");
  Philox rng(spec.seed, streams::noise + static_cast<std::uint64_t>(spec.kind));
  Matrix<Scalar> out = X;
  for (Index j = 0; j < X.cols(); ++j) {
    for (Index i = 0; i < X.rows(); ++i) {
      double e = 0;
      switch (spec.kind) {
        case NoiseKind::uniform: e = rng.uniform(0.0, spec.beta); break;
        case NoiseKind::gaussian: e = std::max(-static_cast<double>(X(i, j)), spec.beta * rng.normal()); break;
        case NoiseKind::exponential: e = rng.exponential(spec.beta); break;
      }
      out(i, j) += static_cast<Scalar>(e);
    }
  }
  return out;
}

/// 13 noise levels, log-spaced from 1e-3 to 1e3.
inline std::vector<double> noise_grid() {
  std::vector<double> out;
  for (int i = 0; i < 13; ++i) out.push_back(std::pow(10.0, -3.0 + 0.5 * i));
  return out;
}

}  // namespace cnmf

#endif  // CNMF_SYNTH_HPP
