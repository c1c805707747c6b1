#include "ncdkit/harness/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncdkit/classify.hpp"
#include "ncdkit/harness/stats.hpp"
#include "ncdkit/parallel.hpp"
#include "ncdkit/version.hpp"

namespace ncdkit {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

using MatrixBuilder = std::function<DistanceMatrix(const FewShotSample&)>;

ExperimentReport run_trials(const Dataset& dataset, const FewShotConfig& config,
                            ExperimentReport report, const RunOptions& options,
                            const MatrixBuilder& build, bool has_lengths) {
  const auto total_start = Clock::now();
  report.dataset = dataset.name;
  report.class_names = dataset.class_names;
  report.config = config;
  report.separator = options.separator;
  report.symmetrize = options.symmetrize;
  report.workers = resolve_workers(options.workers);

  if (config.trials == 0) raise(ErrorKind::invalid_argument, "trials must be at least 1");
  if (config.k == 0) raise(ErrorKind::invalid_argument, "k must be at least 1");

  std::map<std::string, DocumentLength> lengths;
  double sampling_s = 0.0;
  double distance_s = 0.0;
  double classify_s = 0.0;
  const std::size_t classes = dataset.class_names.size();

  for (std::size_t t = 0; t < config.trials; ++t) {
    try {
      const auto trial_start = Clock::now();
      TrialResult trial;
      trial.trial = t;

      auto phase = Clock::now();
      const FewShotSample sample = sample_few_shot(dataset, config, t);
      sampling_s += seconds_since(phase);

      phase = Clock::now();
      const DistanceMatrix matrix = build(sample);
      distance_s += seconds_since(phase);

      phase = Clock::now();
      std::vector<ClassId> train_labels;
      std::vector<ClassId> truth;
      for (const auto& d : sample.train) {
        train_labels.push_back(d.label);
        trial.train_ids.push_back(d.id);
      }
      for (const auto& d : sample.test) {
        truth.push_back(d.label);
        trial.test_ids.push_back(d.id);
      }
      const auto predicted = knn_predict_all(matrix, train_labels, config.k, options.workers);
      classify_s += seconds_since(phase);

      trial.accuracy = accuracy(predicted, truth);
      trial.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
      for (std::size_t i = 0; i < truth.size(); ++i) ++trial.confusion[truth[i]][predicted[i]];
      trial.stats = matrix.stats;

      if (has_lengths) {
        for (const auto& [id, len] : matrix.single_lengths) {
          lengths[id] = DocumentLength{id, len.input_bytes, len.bytes};
        }
      }
      if (options.matrix_dir) {
        std::filesystem::create_directories(*options.matrix_dir);
        const std::string stem = "trial_" + std::to_string(t);
        std::ofstream csv(*options.matrix_dir / (stem + ".csv"), std::ios::binary);
        write_csv(matrix, csv);
        std::ofstream bin(*options.matrix_dir / (stem + ".ncdm"), std::ios::binary);
        write_binary(matrix, bin);
      }

      report.pair_compressions += matrix.stats.pair_compressions;
      report.single_compressions += matrix.stats.single_compressions;
      report.subadditivity_flags += matrix.stats.subadditivity_flags;
      trial.seconds = seconds_since(trial_start);
      report.wall_clock["trial_" + std::to_string(t)] = trial.seconds;
      report.trials.push_back(std::move(trial));
    } catch (const Error& e) {
      report.reportable = false;
      report.wall_clock["total"] = seconds_since(total_start);
      throw ExperimentFailure(
          Error(e.kind(), "trial " + std::to_string(t) + " failed: " + e.what()), report);
    }
  }

  std::vector<double> accuracies;
  for (const auto& t : report.trials) accuracies.push_back(t.accuracy);
  report.mean_accuracy = mean(accuracies);
  report.ci95 = ci95_halfwidth(accuracies);
  if (has_lengths) {
    std::size_t compressed = 0;
    std::size_t original = 0;
    for (auto& [id, len] : lengths) {
      compressed += len.compressed;
      original += len.bytes;
      report.documents.push_back(len);
    }
    if (original > 0) {
      report.compression_rate = static_cast<double>(compressed) / static_cast<double>(original);
    }
  }
  report.wall_clock["sampling"] = sampling_s;
  report.wall_clock["distances"] = distance_s;
  report.wall_clock["classification"] = classify_s;
  report.wall_clock["total"] = seconds_since(total_start);
  return report;
}

json config_json(const ExperimentReport& r) {
  return {{"dataset", r.dataset},
          {"classes", r.class_names},
          {"shots_per_class", r.config.shots_per_class},
          {"test_samples", r.config.test_samples},
          {"trials", r.config.trials},
          {"k", r.config.k},
          {"seed", r.config.seed},
          {"method", r.method},
          {"method_config", r.method_config},
          {"separator", r.separator},
          {"symmetrize", r.symmetrize},
          {"ncdkit_version", kVersion}};
}

}  // namespace

ExperimentReport run_experiment(const Dataset& dataset, const FewShotConfig& config,
                                const Compressor& compressor, const RunOptions& options) {
  ExperimentReport report;
  report.method = compressor.id();
  report.method_config = compressor.config();
  DistanceOptions distance;
  distance.separator = options.separator;
  distance.symmetrize = options.symmetrize;
  distance.workers = options.workers;
  distance.log_pairs = false;
  return run_trials(
      dataset, config, std::move(report), options,
      [&](const FewShotSample& s) { return distance_matrix(compressor, s.train, s.test, distance); },
      true);
}

ExperimentReport run_experiment(const Dataset& dataset, const FewShotConfig& config,
                                const LatentMethod& method, const RunOptions& options) {
  if (!method.embed) raise(ErrorKind::invalid_argument, "latent method has no embedder");
  ExperimentReport report;
  report.method = method.id;
  report.method_config = method.config;
  report.method_config["pooling"] = std::string(to_string(method.pooling));
  report.method_config["normalize"] = method.normalize ? "true" : "false";
  // Embeddings depend on the document alone, so they are shared across trials.
  std::map<std::string, LatentVector> cache;
  auto embed_all = [&](const std::vector<Document>& docs) {
    std::vector<LatentVector> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
      auto it = cache.find(d.id);
      if (it == cache.end()) it = cache.emplace(d.id, method.embed(d)).first;
      out.push_back(it->second);
    }
    return out;
  };
  EuclideanOptions euclid;
  euclid.normalize = method.normalize;
  euclid.workers = options.workers;
  return run_trials(
      dataset, config, std::move(report), options,
      [&](const FewShotSample& s) {
        DistanceMatrix m = euclidean_matrix(embed_all(s.train), embed_all(s.test), euclid);
        for (const auto& d : s.test) m.row_ids.push_back(d.id);
        for (const auto& d : s.train) m.col_ids.push_back(d.id);
        return m;
      },
      false);
}

std::string report_to_json(const ExperimentReport& r, bool include_timing) {
  json trials = json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"trial", t.trial},
                      {"accuracy", t.accuracy},
                      {"confusion", t.confusion},
                      {"train_ids", t.train_ids},
                      {"test_ids", t.test_ids},
                      {"pair_compressions", t.stats.pair_compressions},
                      {"single_compressions", t.stats.single_compressions},
                      {"subadditivity_flags", t.stats.subadditivity_flags}});
  }
  json documents = json::array();
  for (const auto& d : r.documents) {
    documents.push_back({{"id", d.id}, {"bytes", d.bytes}, {"compressed", d.compressed}});
  }
  json out = {{"config", config_json(r)},
              {"trials", trials},
              {"mean_accuracy", r.mean_accuracy},
              {"ci95", r.ci95},
              {"compression_rate", r.compression_rate ? json(*r.compression_rate) : json(nullptr)},
              {"pair_compressions", r.pair_compressions},
              {"single_compressions", r.single_compressions},
              {"subadditivity_flags", r.subadditivity_flags},
              {"documents", documents},
              {"reportable", r.reportable}};
  if (include_timing) {
    out["wall_clock"] = r.wall_clock;
    out["execution"] = {{"workers", r.workers}};
  }
  return out.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  ExperimentReport r;
  try {
    const json j = json::parse(text);
    const json& c = j.at("config");
    r.dataset = c.at("dataset").get<std::string>();
    r.class_names = c.at("classes").get<std::vector<std::string>>();
    r.config.shots_per_class = c.at("shots_per_class").get<std::size_t>();
    r.config.test_samples = c.at("test_samples").get<std::size_t>();
    r.config.trials = c.at("trials").get<std::size_t>();
    r.config.k = c.at("k").get<std::size_t>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.method = c.at("method").get<std::string>();
    r.method_config = c.at("method_config").get<std::map<std::string, std::string>>();
    r.separator = c.value("separator", "");
    r.symmetrize = c.value("symmetrize", false);
    for (const auto& t : j.at("trials")) {
      TrialResult tr;
      tr.trial = t.at("trial").get<std::size_t>();
      tr.accuracy = t.at("accuracy").get<double>();
      tr.confusion = t.at("confusion").get<std::vector<std::vector<std::size_t>>>();
      tr.train_ids = t.at("train_ids").get<std::vector<std::string>>();
      tr.test_ids = t.at("test_ids").get<std::vector<std::string>>();
      tr.stats.pair_compressions = t.value("pair_compressions", std::size_t{0});
      tr.stats.single_compressions = t.value("single_compressions", std::size_t{0});
      tr.stats.subadditivity_flags = t.value("subadditivity_flags", std::size_t{0});
      r.trials.push_back(std::move(tr));
    }
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.ci95 = j.at("ci95").get<double>();
    if (!j.at("compression_rate").is_null()) r.compression_rate = j["compression_rate"].get<double>();
    r.pair_compressions = j.at("pair_compressions").get<std::size_t>();
    r.single_compressions = j.at("single_compressions").get<std::size_t>();
    r.subadditivity_flags = j.value("subadditivity_flags", std::size_t{0});
    for (const auto& d : j.at("documents")) {
      r.documents.push_back({d.at("id").get<std::string>(), d.at("bytes").get<std::size_t>(),
                             d.at("compressed").get<std::size_t>()});
    }
    r.reportable = j.at("reportable").get<bool>();
    if (j.contains("wall_clock")) r.wall_clock = j["wall_clock"].get<std::map<std::string, double>>();
    if (j.contains("execution")) r.workers = j["execution"].value("workers", std::size_t{0});
  } catch (const json::exception& e) {
    raise(ErrorKind::parse, std::string("malformed report: ") + e.what());
  }
  return r;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::io, "cannot write report " + path.string());
  out << report_to_json(report, true);
}

ExperimentReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot read report " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

void write_plot_csv(const std::vector<ExperimentReport>& reports, std::ostream& out) {
  out << "n_shots,mean,ci95,compressor,dataset,compression_rate,warning\n";
  if (reports.empty()) return;
  const std::string& first = reports.front().dataset;
  char buf[64];
  for (const auto& r : reports) {
    out << r.config.shots_per_class;
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", r.mean_accuracy, r.ci95);
    out << buf << csv_field(r.method) << ',' << csv_field(r.dataset) << ',';
    if (r.compression_rate) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.compression_rate);
      out << buf;
    }
    out << ',';
    if (r.dataset != first) out << csv_field("dataset differs from " + first);
    else if (!r.reportable) out << "non-reportable";
    out << '\n';
  }
}

}  // namespace ncdkit
