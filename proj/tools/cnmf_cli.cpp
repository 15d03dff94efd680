// cnmf: generate synthetic instances, fit convolutive NMF models, run the
// recovery benchmark and score estimates against ground truth.
//
// Exit codes: 0 success, 1 algorithm failure, 2 usage or I/O error.

#include "cnmf/baselines.hpp"
#include "cnmf/bench.hpp"
#include "cnmf/io.hpp"
#include "cnmf/lecs.hpp"
#include "cnmf/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using cnmf::io::Json;
namespace fs = std::filesystem;

constexpr int kAlgorithmFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_json(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw UsageError("invalid JSON in " + path + ": " + e.what());
  }
}

bool is_usage_stage(cnmf::Stage s) { return s == cnmf::Stage::input; }

struct GenArgs {
  std::string config, out;
  std::optional<long> N, T, K, L;
  std::optional<double> p, beta;
  std::optional<std::uint64_t> seed, noiseSeed;
  std::optional<std::string> noise;
};

int cmd_gen(const GenArgs& a) {
  Json j = load_json(a.config);
  if (a.N) j["N"] = *a.N;
  if (a.T) j["T"] = *a.T;
  if (a.K) j["K"] = *a.K;
  if (a.L) j["L"] = *a.L;
  if (a.p) j["p"] = *a.p;
  if (a.seed) j["seed"] = *a.seed;
  if (a.noise || a.beta || a.noiseSeed) {
    Json n = j.value("noise", Json::object());
    if (a.noise) n["kind"] = *a.noise;
    if (a.beta) n["beta"] = *a.beta;
    if (a.noiseSeed) n["seed"] = *a.noiseSeed;
    j["noise"] = n;
  }

  cnmf::SynthConfig cfg;
  std::optional<cnmf::NoiseSpec> noise;
  try {
    cfg = cnmf::io::synth_config_from_json(j);
    cfg.validate();
    if (j.contains("noise")) noise = cnmf::io::noise_spec_from_json(j.at("noise"));
  } catch (const cnmf::Error& e) {
    throw UsageError(e.what());
  } catch (const Json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }

  const auto gt = cnmf::gen_separable<double>(cfg);
  std::optional<Eigen::MatrixXd> noisy;
  if (noise) noisy = cnmf::add_noise(gt.X, *noise);
  cnmf::io::write_ground_truth(a.out, gt, cfg, noise, noisy ? &*noisy : nullptr);
  std::cout << "wrote " << a.out << " (X " << gt.X.rows() << "x" << gt.X.cols() << ", delta " << gt.delta << ")\n";
  return 0;
}

struct FitArgs {
  std::string matrix, alg = "lecs", out = "fit_out", init, truth, config, cluster = "greedy";
  std::optional<long> K, L;
  std::optional<double> t;
  bool tSweep = false;
  bool noAlign = false;
  std::optional<int> iters;
  std::optional<std::uint64_t> seed;
};

int cmd_fit(FitArgs a) {
  const Json j = load_json(a.config);
  if (!a.K && j.contains("K")) a.K = j.at("K").get<long>();
  if (!a.L && j.contains("L")) a.L = j.at("L").get<long>();
  if (!a.t && j.contains("t")) a.t = j.at("t").get<double>();
  if (!a.iters && j.contains("iters")) a.iters = j.at("iters").get<int>();
  if (!a.seed && j.contains("seed")) a.seed = j.at("seed").get<std::uint64_t>();
  if (!a.K || !a.L) throw UsageError("--K and --L are required");
  if (a.tSweep && a.t) throw UsageError("--t and --t-sweep are exclusive");

  Eigen::MatrixXd X;
  std::optional<cnmf::CnmfModel<double>> init;
  std::optional<Eigen::MatrixXd> truth;
  try {
    X = cnmf::io::read_csv(a.matrix);
    if (!a.init.empty()) init = cnmf::io::read_model(a.init);
    if (!a.truth.empty()) truth = cnmf::io::read_csv(a.truth);
  } catch (const cnmf::Error& e) {
    throw UsageError(e.what());
  }

  cnmf::CnmfModel<double> model;
  cnmf::FitReport report;
  if (a.alg == "lecs" || a.alg == "lecs-pre") {
    cnmf::LecsConfig cfg;
    cfg.K = *a.K;
    cfg.L = *a.L;
    cfg.threshold = a.t;
    cfg.locator = a.alg == "lecs" ? cnmf::Locator::spa_conic : cnmf::Locator::spa_preconditioned;
    if (a.cluster == "spectral") cfg.cluster = cnmf::ClusterMethod::spectral;
    else if (a.cluster != "greedy") throw UsageError("--cluster must be greedy or spectral");
    cfg.alignRowScales = !a.noAlign;
    auto run = cnmf::lecs_fit(X, cfg);
    model = std::move(run.model);
    report = std::move(run.report);
  } else if (a.alg == "mult" || a.alg == "anls") {
    cnmf::IterOptions opts;
    opts.maxIterations = a.iters.value_or(a.alg == "mult" ? 200 : 15);
    opts.seed = a.seed.value_or(0);
    auto fit = a.alg == "mult" ? cnmf::mult_fit(X, *a.K, *a.L, opts, init) : cnmf::anls_fit(X, *a.K, *a.L, opts, init);
    model = std::move(fit.model);
    report = std::move(fit.report);
    report.params["seed"] = static_cast<double>(opts.seed);
  } else {
    throw UsageError("--alg must be one of lecs, lecs-pre, mult, anls");
  }
  if (truth) report.score = cnmf::perm_score(*truth, model.H).score;

  cnmf::io::write_model(a.out, model);
  cnmf::io::write_text(fs::path(a.out) / "report.json", cnmf::io::to_json(report).dump(2) + "\n");
  std::cout << report.algorithm << ": relMse " << report.relMse;
  if (report.chosenT) std::cout << ", t " << *report.chosenT;
  if (report.score) std::cout << ", score " << *report.score;
  std::cout << "\n";
  return 0;
}

struct BenchArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool recordSeconds = false;
};

int cmd_bench(const BenchArgs& a) {
  Json j = load_json(a.config);
  if (a.seed) j["seed"] = *a.seed;
  if (a.threads) j["threads"] = *a.threads;
  if (a.recordSeconds) j["record_seconds"] = true;
  cnmf::BenchConfig cfg;
  try {
    cfg = cnmf::bench_config_from_json(j);
  } catch (const cnmf::Error& e) {
    throw UsageError(e.what());
  } catch (const Json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  const std::string csv = cnmf::bench_csv(cnmf::run_bench(cfg), cfg.recordSeconds);
  if (a.out.empty()) std::cout << csv;
  else cnmf::io::write_text(a.out, csv);
  return 0;
}

int cmd_score(const std::string& truePath, const std::string& estPath) {
  Eigen::MatrixXd H, Ht;
  try {
    H = cnmf::io::read_csv(truePath);
    Ht = cnmf::io::read_csv(estPath);
  } catch (const cnmf::Error& e) {
    throw UsageError(e.what());
  }
  if (H.rows() != Ht.rows() || H.cols() != Ht.cols())
    throw UsageError("shape mismatch: " + std::to_string(H.rows()) + "x" + std::to_string(H.cols()) + " vs " +
                     std::to_string(Ht.rows()) + "x" + std::to_string(Ht.cols()));
  const auto a = cnmf::perm_score(H, Ht);
  std::cout << Json{{"score", a.score}, {"permutation", a.permutation}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolutive NMF by Locate-Estimate-Cluster-Sort"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a convolutive-separable instance");
  g->add_option("config,--config", gen.config, "JSON config (N, T, K, L, p, seed, optional noise{kind, beta, seed})");
  g->add_option("--out,-o", gen.out, "output directory")->required();
  g->add_option("--N", gen.N);
  g->add_option("--T", gen.T);
  g->add_option("--K", gen.K);
  g->add_option("--L", gen.L);
  g->add_option("--p", gen.p, "sparsity of H");
  g->add_option("--seed", gen.seed);
  g->add_option("--noise", gen.noise, "uniform, gaussian or exponential");
  g->add_option("--beta", gen.beta, "noise level");
  g->add_option("--noise-seed", gen.noiseSeed);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "fit a model to a CSV matrix");
  f->add_option("matrix", fit.matrix, "input CSV")->required();
  f->add_option("--alg", fit.alg, "lecs, lecs-pre, mult or anls");
  f->add_option("--K", fit.K, "number of components");
  f->add_option("--L", fit.L, "number of lags");
  f->add_option("--t", fit.t, "fixed LECS threshold");
  f->add_flag("--t-sweep", fit.tSweep, "sweep the threshold over the column 1-norms (default without --t)");
  f->add_option("--cluster", fit.cluster, "greedy or spectral");
  f->add_flag("--no-align", fit.noAlign, "average cluster rows without rescaling");
  f->add_option("--iters", fit.iters, "iterations for mult / anls");
  f->add_option("--init", fit.init, "model directory to start mult / anls from");
  f->add_option("--seed", fit.seed, "seed of the random initialization");
  f->add_option("--truth", fit.truth, "ground-truth H.csv; adds a score to the report");
  f->add_option("--config", fit.config, "JSON with K, L, t, iters, seed (flags override)");
  f->add_option("--out,-o", fit.out, "output directory");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "run the synthetic recovery benchmark");
  b->add_option("config,--config", bench.config, "JSON bench config");
  b->add_option("--out,-o", bench.out, "CSV output (stdout if omitted)");
  b->add_option("--seed", bench.seed, "master seed");
  b->add_option("--threads", bench.threads, "worker count (default CNMF_THREADS or all cores)");
  b->add_flag("--record-seconds", bench.recordSeconds, "fill the seconds column");

  std::string scoreTrue, scoreEst;
  auto* s = app.add_subcommand("score", "score an estimated H against ground truth");
  s->add_option("truth", scoreTrue, "ground-truth H.csv")->required();
  s->add_option("estimate", scoreEst, "estimated H.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*f) return cmd_fit(fit);
    if (*b) return cmd_bench(bench);
    if (*s) return cmd_score(scoreTrue, scoreEst);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const cnmf::Error& e) {
    std::cerr << "error [" << cnmf::stage_name(e.stage()) << "]: " << e.what() << "\n";
    return is_usage_stage(e.stage()) ? kUsageError : kAlgorithmFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAlgorithmFailure;
  }
  return kUsageError;
}
