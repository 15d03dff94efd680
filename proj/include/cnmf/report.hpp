// Per-run metrics shared by LECS and the iterative baselines.

#ifndef CNMF_REPORT_HPP
#define CNMF_REPORT_HPP

#include "cnmf/core.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cnmf {

struct SweepEntry {
  double t = 0;
  std::optional<double> relMse;  // empty when the run failed
  std::string error;
};

struct FitReport {
  std::string algorithm;
  std::map<std::string, double> params;
  double relMse = 0;
  std::optional<double> score;
  std::vector<double> lossTrace;  // relative error after each iteration; entry 0 is the start
  std::map<std::string, double> stageSeconds;
  std::optional<double> chosenT;
  std::vector<Index> locatorIndices;
  int nnlsIterations = 0;
  bool nnlsRankDeficient = false;
  std::vector<SweepEntry> sweep;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace cnmf

#endif  // CNMF_REPORT_HPP
