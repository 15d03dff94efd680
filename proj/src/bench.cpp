#include "cnmf/bench.hpp"

#include "cnmf/baselines.hpp"
#include "cnmf/lecs.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace cnmf {

namespace {

const std::vector<std::string> kAlgorithms{"lecs", "lecs-pre", "mult", "lecs-mult", "anls", "lecs-anls"};

struct Cell {
  std::size_t kind, beta, alg;
  int trial;
};

BenchRow run_cell(const BenchConfig& cfg, const Cell& cell, std::size_t cellIndex,
                  const std::vector<GroundTruth<double>>& truths) {
  BenchRow row;
  row.noise = noise_name(cfg.noiseKinds[cell.kind]);
  row.beta = cfg.betas[cell.beta];
  row.trial = cell.trial;
  row.alg = cfg.algorithms[cell.alg];

  const auto& gt = truths[static_cast<std::size_t>(cell.trial)];
  NoiseSpec noise;
  noise.kind = cfg.noiseKinds[cell.kind];
  noise.beta = row.beta;
  noise.seed = derive_seed(derive_seed(cfg.seed, 0x6e6f697365ull), cell.beta * 1000003u + static_cast<std::size_t>(cell.trial));
  const Eigen::MatrixXd X = add_noise(gt.X, noise);

  const Index K = cfg.instance.K, L = cfg.instance.L;
  Stopwatch sw;
  try {
    CnmfModel<double> model;
    std::optional<double> chosenT;
    double relMse = 0;
    const std::string& alg = row.alg;
    LecsConfig lc;
    lc.K = K;
    lc.L = L;
    lc.locator = alg == "lecs-pre" ? Locator::spa_preconditioned : Locator::spa_conic;
    IterOptions it;
    it.seed = derive_seed(cfg.seed, cellIndex);
    it.recordTrace = false;

    if (alg == "lecs" || alg == "lecs-pre") {
      auto run = lecs_fit(X, lc);
      model = std::move(run.model);
      chosenT = run.report.chosenT;
      relMse = run.report.relMse;
    } else if (alg == "mult" || alg == "anls") {
      it.maxIterations = alg == "mult" ? cfg.multIterations : cfg.anlsIterations;
      auto fit = alg == "mult" ? mult_fit(X, K, L, it) : anls_fit(X, K, L, it);
      model = std::move(fit.model);
      relMse = fit.report.relMse;
    } else {
      auto init = lecs_fit(X, lc);
      chosenT = init.report.chosenT;
      it.maxIterations = alg == "lecs-mult" ? cfg.multIterations : cfg.anlsIterations;
      auto fit = alg == "lecs-mult" ? mult_fit(X, K, L, it, std::optional(init.model))
                                    : anls_fit(X, K, L, it, std::optional(init.model));
      model = std::move(fit.model);
      relMse = fit.report.relMse;
    }
    row.score = perm_score(gt.model.H, model.H).score;
    row.relMse = relMse;
    row.chosenT = chosenT;
  } catch (const Error&) {
    row.score = std::numeric_limits<double>::quiet_NaN();
    row.relMse = std::numeric_limits<double>::quiet_NaN();
  }
  row.seconds = sw.seconds();
  return row;
}

}  // namespace

unsigned default_threads() {
  if (const char* env = std::getenv("CNMF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BenchConfig bench_config_from_json(const io::Json& j) {
  BenchConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.instance = io::synth_config_from_json(j.value("instance", io::Json{{"N", 100}, {"T", 250}, {"K", 3}, {"L", 5}}));
  cfg.trials = j.value("trials", cfg.trials);
  if (j.contains("noise_kinds")) {
    cfg.noiseKinds.clear();
    for (const auto& k : j.at("noise_kinds")) cfg.noiseKinds.push_back(parse_noise_kind(k.get<std::string>()));
  }
  if (j.contains("betas")) cfg.betas = j.at("betas").get<std::vector<double>>();
  if (j.contains("algorithms")) cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  cfg.multIterations = j.value("mult_iterations", cfg.multIterations);
  cfg.anlsIterations = j.value("anls_iterations", cfg.anlsIterations);
  cfg.recordSeconds = j.value("record_seconds", cfg.recordSeconds);
  cfg.threads = j.value("threads", cfg.threads);

  if (cfg.trials < 1) throw Error(Stage::input, "trials must be >= 1");
  if (cfg.betas.empty() || cfg.noiseKinds.empty() || cfg.algorithms.empty())
    throw Error(Stage::input, "bench grid has an empty axis");
  for (double b : cfg.betas)
    if (!(b > 0)) throw Error(Stage::input, "betas must be positive");
  for (const auto& a : cfg.algorithms)
    if (std::find(kAlgorithms.begin(), kAlgorithms.end(), a) == kAlgorithms.end())
      throw Error(Stage::input, "unknown algorithm '" + a + "'");
  cfg.instance.validate();
  return cfg;
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  std::vector<GroundTruth<double>> truths;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    SynthConfig sc = cfg.instance;
    sc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    truths.push_back(gen_separable<double>(sc));
  }

  std::vector<Cell> cells;
  for (std::size_t k = 0; k < cfg.noiseKinds.size(); ++k)
    for (std::size_t b = 0; b < cfg.betas.size(); ++b)
      for (int t = 0; t < cfg.trials; ++t)
        for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) cells.push_back({k, b, a, t});

  std::vector<BenchRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(cfg, cells[i], i, truths);
  };
  const unsigned n = std::min<unsigned>(cfg.threads ? cfg.threads : default_threads(),
                                        static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool recordSeconds) {
  std::string out = "noise,beta,trial,alg,score,rel_mse,seconds,chosen_t\n";
  for (const auto& r : rows) {
    out += r.noise + ',' + io::format_number(r.beta) + ',' + std::to_string(r.trial) + ',' + r.alg + ',' +
           io::format_number(r.score) + ',' + io::format_number(r.relMse) + ',' +
           (recordSeconds ? io::format_number(r.seconds) : std::string()) + ',' +
           (r.chosenT ? io::format_number(*r.chosenT) : std::string()) + '\n';
  }
  return out;
}

}  // namespace cnmf
