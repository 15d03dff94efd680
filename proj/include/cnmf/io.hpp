// CSV matrices, model / ground-truth directories and JSON encodings of the
// configuration and report types. Double precision only.

#ifndef CNMF_IO_HPP
#define CNMF_IO_HPP

#include "cnmf/core.hpp"
#include "cnmf/lecs.hpp"
#include "cnmf/report.hpp"
#include "cnmf/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace cnmf::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// Comma-separated rows; blank lines and lines starting with '#' (such as a
/// "# rows=N cols=T" header) are skipped.
Eigen::MatrixXd parse_csv(const std::string& text);
Eigen::MatrixXd read_csv(const fs::path& path);

/// Shortest round-trip decimal form of every entry.
std::string format_csv(const Eigen::MatrixXd& M);
void write_csv(const fs::path& path, const Eigen::MatrixXd& M);

/// Shortest round-trip decimal form of one value.
std::string format_number(double v);

/// H.csv plus W_1.csv .. W_L.csv.
void write_model(const fs::path& dir, const CnmfModel<double>& model);
CnmfModel<double> read_model(const fs::path& dir);

Json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const Json& j);
Json to_json(const NoiseSpec& spec);
NoiseSpec noise_spec_from_json(const Json& j);

/// X.csv, H.csv, W_*.csv and meta.json; with noise also X_noisy.csv.
void write_ground_truth(const fs::path& dir, const GroundTruth<double>& gt, const SynthConfig& cfg,
                        const std::optional<NoiseSpec>& noise, const Eigen::MatrixXd* noisy);

Json to_json(const FitReport& report);

void write_text(const fs::path& path, const std::string& text);

}  // namespace cnmf::io

#endif  // CNMF_IO_HPP
