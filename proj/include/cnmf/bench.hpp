// Synthetic recovery benchmark: {noise kinds} x {betas} x {trials} x
// {algorithms}, one row per cell, every random draw derived from the master
// seed and the cell position so the worker count never changes the output.

#ifndef CNMF_BENCH_HPP
#define CNMF_BENCH_HPP

#include "cnmf/io.hpp"
#include "cnmf/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cnmf {

struct BenchConfig {
  std::uint64_t seed = 1;
  SynthConfig instance;  // its seed is ignored; trials derive their own
  int trials = 10;
  std::vector<NoiseKind> noiseKinds{NoiseKind::uniform, NoiseKind::gaussian, NoiseKind::exponential};
  std::vector<double> betas = noise_grid();
  /// Any of lecs, lecs-pre, mult, lecs-mult, anls, lecs-anls.
  std::vector<std::string> algorithms{"lecs", "lecs-pre", "mult", "lecs-mult"};
  int multIterations = 200;
  int anlsIterations = 15;
  /// Wall time makes the CSV machine dependent, so it is opt-in.
  bool recordSeconds = false;
  /// 0: CNMF_THREADS if set, otherwise the hardware concurrency.
  unsigned threads = 0;
};

struct BenchRow {
  std::string noise;
  double beta = 0;
  int trial = 0;
  std::string alg;
  double score = 0;
  double relMse = 0;
  double seconds = 0;
  std::optional<double> chosenT;
};

BenchConfig bench_config_from_json(const io::Json& j);

/// Rows in (noise, beta, trial, algorithm) order, following the config lists.
std::vector<BenchRow> run_bench(const BenchConfig& cfg);

/// Header `noise,beta,trial,alg,score,rel_mse,seconds,chosen_t`.
std::string bench_csv(const std::vector<BenchRow>& rows, bool recordSeconds);

/// Worker count from CNMF_THREADS or the hardware.
unsigned default_threads();

}  // namespace cnmf

#endif  // CNMF_BENCH_HPP
