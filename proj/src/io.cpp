#include "cnmf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace cnmf::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(Stage::input, "line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
  return v;
}

}  // namespace

Eigen::MatrixXd parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(parse_number(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start), lineNo));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(Stage::input, "line " + std::to_string(lineNo) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Stage::input, "empty matrix file");
  Eigen::MatrixXd M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return M;
}

Eigen::MatrixXd read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Stage::input, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_csv(const Eigen::MatrixXd& M) {
  std::string out;
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out += ',';
      out += format_number(M(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Stage::input, "cannot write " + path.string());
  out << text;
}

void write_csv(const fs::path& path, const Eigen::MatrixXd& M) { write_text(path, format_csv(M)); }

void write_model(const fs::path& dir, const CnmfModel<double>& model) {
  fs::create_directories(dir);
  write_csv(dir / "H.csv", model.H);
  for (std::size_t l = 0; l < model.W.size(); ++l)
    write_csv(dir / ("W_" + std::to_string(l + 1) + ".csv"), model.W[l]);
}

CnmfModel<double> read_model(const fs::path& dir) {
  CnmfModel<double> model;
  model.H = read_csv(dir / "H.csv");
  for (int l = 1; fs::exists(dir / ("W_" + std::to_string(l) + ".csv")); ++l)
    model.W.push_back(read_csv(dir / ("W_" + std::to_string(l) + ".csv")));
  model.check_dimensions();
  return model;
}

Json to_json(const SynthConfig& cfg) {
  return Json{{"N", cfg.N}, {"T", cfg.T}, {"K", cfg.K}, {"L", cfg.L}, {"p", cfg.p}, {"seed", cfg.seed}};
}

SynthConfig synth_config_from_json(const Json& j) {
  SynthConfig cfg;
  for (const char* key : {"N", "T", "K", "L"})
    if (!j.contains(key)) throw Error(Stage::input, std::string("config is missing '") + key + "'");
  cfg.N = j.at("N").get<Index>();
  cfg.T = j.at("T").get<Index>();
  cfg.K = j.at("K").get<Index>();
  cfg.L = j.at("L").get<Index>();
  cfg.p = j.value("p", cfg.p);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

Json to_json(const NoiseSpec& spec) {
  return Json{{"kind", noise_name(spec.kind)}, {"beta", spec.beta}, {"seed", spec.seed}};
}

NoiseSpec noise_spec_from_json(const Json& j) {
  NoiseSpec spec;
  spec.kind = parse_noise_kind(j.value("kind", std::string("uniform")));
  if (!j.contains("beta")) throw Error(Stage::input, "noise spec is missing 'beta'");
  spec.beta = j.at("beta").get<double>();
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

void write_ground_truth(const fs::path& dir, const GroundTruth<double>& gt, const SynthConfig& cfg,
                        const std::optional<NoiseSpec>& noise, const Eigen::MatrixXd* noisy) {
  fs::create_directories(dir);
  write_csv(dir / "X.csv", gt.X);
  write_model(dir, gt.model);
  Json meta{{"config", to_json(cfg)}, {"delta", gt.delta}, {"sigma_min_V", gt.sigmaMinV}, {"attempts", gt.attempts}};
  Json anchors = Json::array();
  for (const auto& [t, s] : gt.anchors) anchors.push_back({{"t", t}, {"s", s}});
  meta["anchors"] = anchors;
  meta["separability_columns"] = gt.separabilityColumns;
  if (noise) {
    meta["noise"] = to_json(*noise);
    if (noisy) write_csv(dir / "X_noisy.csv", *noisy);
  }
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

Json to_json(const FitReport& report) {
  Json j{{"algorithm", report.algorithm}, {"params", report.params}, {"relMse", report.relMse},
         {"lossTrace", report.lossTrace}, {"stageSeconds", report.stageSeconds},
         {"nnlsIterations", report.nnlsIterations}, {"nnlsRankDeficient", report.nnlsRankDeficient}};
  if (report.score) j["score"] = *report.score;
  if (report.chosenT) j["chosenT"] = *report.chosenT;
  if (!report.locatorIndices.empty()) j["locatorIndices"] = report.locatorIndices;
  if (!report.sweep.empty()) {
    Json sweep = Json::array();
    for (const auto& e : report.sweep) {
      Json row{{"t", e.t}};
      if (e.relMse) row["relMse"] = *e.relMse;
      else row["error"] = e.error;
      sweep.push_back(row);
    }
    j["sweep"] = sweep;
  }
  return j;
}

}  // namespace cnmf::io
