// Dense matrix aliases, the convolutive model containers and the error type
// shared by every part of the library.

#ifndef CNMF_CORE_HPP
#define CNMF_CORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cnmf {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Pipeline stage that raised an error; carried to the CLI so failures name
/// where they happened.
enum class Stage { input, locate, estimate, cluster, sort, assemble, generate, fit };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::input: return "input";
    case Stage::locate: return "locate";
    case Stage::estimate: return "estimate";
    case Stage::cluster: return "cluster";
    case Stage::sort: return "sort";
    case Stage::assemble: return "assemble";
    case Stage::generate: return "generate";
    case Stage::fit: return "fit";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what)
      : std::runtime_error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

/// Factor set of X = sum_l W_l H S_{l-1}. `W[l]` is N x K, `H` is K x T.
template <typename Scalar>
struct CnmfModel {
  std::vector<Matrix<Scalar>> W;
  Matrix<Scalar> H;

  Index lags() const { return static_cast<Index>(W.size()); }
  Index components() const { return H.rows(); }
  Index features() const { return W.empty() ? 0 : W.front().rows(); }
  Index samples() const { return H.cols(); }

  /// Throws when the W blocks disagree in shape or do not match H.
  void check_dimensions() const {
    if (W.empty()) throw Error(Stage::input, "model has no W blocks");
    for (const auto& w : W) {
      if (w.rows() != W.front().rows() || w.cols() != W.front().cols())
        throw Error(Stage::input, "W blocks differ in shape");
      if (w.cols() != H.rows())
        throw Error(Stage::input, "W block column count does not match H row count");
    }
  }

  bool nonnegative() const {
    for (const auto& w : W)
      if ((w.array() < Scalar(0)).any()) return false;
    return !(H.array() < Scalar(0)).any();
  }
};

/// Row `r` of the stacked G belongs to component `component` at lag `lag`
/// (both zero-based).
struct RowTag {
  Index component = 0;
  Index lag = 0;
  friend bool operator==(const RowTag&, const RowTag&) = default;
};

/// The (V, G) pair with V G = sum_l W_l H S_{l-1}.
template <typename Scalar>
struct BlockFactorization {
  Matrix<Scalar> V;
  Matrix<Scalar> G;
  std::vector<RowTag> rowMap;
};

}  // namespace cnmf

#endif  // CNMF_CORE_HPP
