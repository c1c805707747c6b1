#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncdkit/compressors.hpp"
#include "ncdkit/error.hpp"
#include "ncdkit/harness/dataset.hpp"
#include "ncdkit/harness/sampling.hpp"
#include "ncdkit/latent.hpp"
#include "ncdkit/ncd.hpp"

namespace ncdkit {

// Produces a document's latent vector (the Euclidean baseline).
struct LatentMethod {
  std::string id;
  std::map<std::string, std::string> config;
  Pooling pooling = Pooling::mean_tokens;
  bool normalize = false;
  std::function<LatentVector(const Document&)> embed;
};

struct RunOptions {
  std::size_t workers = 0;
  std::string separator;
  bool symmetrize = false;
  // When set, each trial's matrix is written here as CSV and NCDM.
  std::optional<std::filesystem::path> matrix_dir;
};

struct TrialResult {
  std::size_t trial = 0;
  double accuracy = 0.0;
  // confusion[truth][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  MatrixStats stats;
  double seconds = 0.0;
};

struct DocumentLength {
  std::string id;
  std::size_t bytes = 0;
  std::size_t compressed = 0;
};

struct ExperimentReport {
  std::string dataset;
  std::vector<std::string> class_names;
  FewShotConfig config;
  std::string method;
  std::map<std::string, std::string> method_config;
  std::string separator;
  bool symmetrize = false;

  std::vector<TrialResult> trials;
  double mean_accuracy = 0.0;
  double ci95 = 0.0;
  // Absent for latent runs.
  std::optional<double> compression_rate;
  std::size_t pair_compressions = 0;
  std::size_t single_compressions = 0;
  std::size_t subadditivity_flags = 0;
  // Every distinct document compressed in any trial, sorted by id.
  std::vector<DocumentLength> documents;
  bool reportable = true;

  // Non-semantic fields, excluded from determinism comparisons.
  std::map<std::string, double> wall_clock;
  std::size_t workers = 0;
};

// Thrown when a trial fails; carries the completed trials flagged
// non-reportable.
class ExperimentFailure : public Error {
 public:
  ExperimentFailure(const Error& cause, ExperimentReport partial)
      : Error(cause.kind(), cause.what()), partial_(std::move(partial)) {}

  const ExperimentReport& partial() const noexcept { return partial_; }

 private:
  ExperimentReport partial_;
};

// Runs cfg.trials trials in order; each samples (seed, trial), fills the
// distance matrix in parallel and classifies by kNN.
ExperimentReport run_experiment(const Dataset& dataset, const FewShotConfig& config,
                                const Compressor& compressor, const RunOptions& options = {});
ExperimentReport run_experiment(const Dataset& dataset, const FewShotConfig& config,
                                const LatentMethod& method, const RunOptions& options = {});

// Report JSON. With include_timing = false the wall_clock and execution
// blocks are omitted, leaving a pure function of (dataset, config).
std::string report_to_json(const ExperimentReport& report, bool include_timing = true);
ExperimentReport report_from_json(const std::string& text);
void write_report(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport read_report(const std::filesystem::path& path);

// Plot data for external figure tooling, one row per report.
void write_plot_csv(const std::vector<ExperimentReport>& reports, std::ostream& out);

}  // namespace ncdkit
