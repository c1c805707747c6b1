#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ncdkit/bridge/bridged_compressor.hpp"
#include "ncdkit/codec/arithmetic_coder.hpp"
#include "ncdkit/codec/models.hpp"
#include "ncdkit/compressors.hpp"
#include "ncdkit/harness/dataset.hpp"
#include "ncdkit/harness/experiment.hpp"
#include "ncdkit/harness/sampling.hpp"
#include "ncdkit/version.hpp"

namespace ncdkit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_endpoint(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("NCDKIT_BRIDGE");
  return env ? env : "";
}

std::vector<std::string> parse_classes(const std::string& spec) {
  if (spec.empty()) return {};
  if (auto preset = preset_classes(spec)) return *preset;
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Dataset load(const std::string& path, const std::string& classes) {
  if (!fs::exists(path)) raise(ErrorKind::usage, "dataset not found: " + path);
  LoadOptions opts;
  opts.keep_classes = parse_classes(classes);
  Dataset ds = load_dataset(path, opts);
  if (ds.documents.empty()) raise(ErrorKind::empty_input, "dataset " + path + " has no documents");
  return ds;
}

// File-name friendly rendering of a compressor spec.
std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorKind::io, "cannot create output directory " + dir + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::io, "cannot write " + path.string());
  out << content;
}

void write_config(const std::string& dir, const std::string& command, json resolved) {
  if (dir.empty()) return;
  resolved["command"] = command;
  resolved["ncdkit_version"] = kVersion;
  write_file(fs::path(dir) / "config.json", resolved.dump(2) + "\n");
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

// ---- rate -----------------------------------------------------------------

struct RateArgs {
  std::vector<std::string> datasets;
  std::vector<std::string> compressors{"gzip", "zstd", "lzma"};
  std::string classes;
  std::string split = "all";
  std::string out;
  std::string bridge;
};

int cmd_rate(const RateArgs& a, std::ostream& out) {
  CompressorOptions copts;
  copts.default_endpoint = default_endpoint(a.bridge);
  std::vector<CompressorHandle> compressors;
  for (const auto& spec : a.compressors) compressors.push_back(make_compressor(spec, copts));

  struct Column {
    std::string name;
    std::vector<std::string> texts;
  };
  std::vector<Column> columns;
  for (const auto& path : a.datasets) {
    const Dataset ds = load(path, a.classes);
    Column col{ds.name, {}};
    for (std::size_t i = 0; i < ds.documents.size(); ++i) {
      const Split s = ds.splits[i];
      if (a.split == "train" && s == Split::test) continue;
      if (a.split == "test" && s != Split::test) continue;
      col.texts.push_back(ds.documents[i].text);
    }
    if (col.texts.empty()) {
      raise(ErrorKind::empty_input, "no documents of split \"" + a.split + "\" in " + path);
    }
    columns.push_back(std::move(col));
  }

  ensure_dir(a.out);
  std::ostringstream csv;
  csv << "compressor,dataset,rate,documents,bytes,compressed\n";
  std::vector<std::vector<double>> table(compressors.size());
  for (std::size_t r = 0; r < compressors.size(); ++r) {
    for (const auto& col : columns) {
      std::size_t original = 0;
      std::size_t compressed = 0;
      for (const auto& t : col.texts) {
        original += t.size();
        compressed += compressed_length(*compressors[r], t).bytes;
      }
      const double rate = static_cast<double>(compressed) / static_cast<double>(original);
      table[r].push_back(rate);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", rate);
      csv << a.compressors[r] << ',' << col.name << ',' << buf << ',' << col.texts.size() << ','
          << original << ',' << compressed << '\n';
    }
  }

  std::size_t width = 12;
  for (const auto& s : a.compressors) width = std::max(width, s.size() + 2);
  out << std::left << std::setw(static_cast<int>(width)) << "compressor";
  for (const auto& col : columns) out << std::setw(static_cast<int>(std::max<std::size_t>(12, col.name.size() + 2))) << col.name;
  out << '\n';
  for (std::size_t r = 0; r < compressors.size(); ++r) {
    out << std::setw(static_cast<int>(width)) << a.compressors[r];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << std::setw(static_cast<int>(std::max<std::size_t>(12, columns[c].name.size() + 2)))
          << fixed(table[r][c]);
    }
    out << '\n';
  }

  if (!a.out.empty()) {
    write_file(fs::path(a.out) / "rates.csv", csv.str());
    json configs = json::object();
    for (const auto& c : compressors) configs[c->id()] = c->config();
    write_config(a.out, "rate",
                 {{"datasets", a.datasets},
                  {"compressors", a.compressors},
                  {"classes", parse_classes(a.classes)},
                  {"split", a.split},
                  {"compressor_config", configs}});
  }
  return 0;
}

// ---- classify -------------------------------------------------------------

struct ClassifyArgs {
  std::string dataset;
  std::vector<std::string> methods{"gzip"};
  std::vector<std::size_t> shots{5};
  std::size_t test_samples = 100;
  std::size_t trials = 5;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string separator;
  bool symmetrize = false;
  bool normalize = false;
  bool save_matrices = false;
  std::string classes;
  std::string out;
  std::string bridge;
};

struct LatentSpec {
  std::string endpoint;
  Pooling pooling = Pooling::mean_tokens;
};

// "latent@<endpoint>:<pooling>" or "latent:<pooling>" (default endpoint).
std::optional<LatentSpec> parse_latent(const std::string& spec, const std::string& fallback) {
  if (!spec.starts_with("latent")) return std::nullopt;
  std::string rest = spec.substr(6);
  LatentSpec out;
  std::string pooling;
  if (rest.starts_with("@")) {
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon < 2) {
      raise(ErrorKind::usage, "latent spec needs a pooling suffix: latent@<endpoint>:<pooling>");
    }
    out.endpoint = rest.substr(1, colon - 1);
    pooling = rest.substr(colon + 1);
  } else if (rest.starts_with(":")) {
    out.endpoint = fallback;
    pooling = rest.substr(1);
  } else {
    raise(ErrorKind::usage, "unknown method spec \"" + spec + "\"");
  }
  const auto p = parse_pooling(pooling);
  if (!p) raise(ErrorKind::usage, "unknown pooling \"" + pooling + "\" (mean_tokens or final_state)");
  out.pooling = *p;
  if (out.endpoint.empty()) {
    raise(ErrorKind::bridge, "latent method needs a model bridge (latent@<endpoint>:<pooling> or NCDKIT_BRIDGE)");
  }
  return out;
}

LatentMethod make_latent(const std::string& spec, const LatentSpec& l, bool normalize) {
  auto pool = std::make_shared<SessionPool>(l.endpoint);
  const SessionInfo info = pool->info();
  LatentMethod m;
  m.id = spec;
  m.pooling = l.pooling;
  m.normalize = normalize;
  m.config = {{"endpoint", l.endpoint},
              {"model_id", info.model_id},
              {"hidden_size", std::to_string(info.hidden_size)}};
  const Pooling pooling = l.pooling;
  m.embed = [pool, pooling](const Document& d) {
    auto lease = pool->acquire();
    try {
      return lease->embed(d.text, pooling);
    } catch (...) {
      lease.discard();
      throw;
    }
  };
  return m;
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const Dataset ds = load(a.dataset, a.classes);
  const std::string endpoint = default_endpoint(a.bridge);
  CompressorOptions copts;
  copts.default_endpoint = endpoint;

  // Resolve every method before any compute so spec errors surface first.
  struct Method {
    std::string spec;
    CompressorHandle compressor;
    std::optional<LatentMethod> latent;
  };
  std::vector<Method> methods;
  for (const auto& spec : a.methods) {
    if (auto l = parse_latent(spec, endpoint)) {
      methods.push_back({spec, nullptr, make_latent(spec, *l, a.normalize)});
    } else {
      methods.push_back({spec, make_compressor(spec, copts), std::nullopt});
    }
  }
  for (std::size_t s : a.shots) {
    if (s == 0) raise(ErrorKind::usage, "--shots values must be positive");
  }

  ensure_dir(a.out);
  json resolved = {{"dataset", a.dataset},
                   {"methods", a.methods},
                   {"shots", a.shots},
                   {"test_samples", a.test_samples},
                   {"trials", a.trials},
                   {"k", a.k},
                   {"seed", a.seed},
                   {"workers", a.workers},
                   {"separator", a.separator},
                   {"symmetrize", a.symmetrize},
                   {"normalize", a.normalize},
                   {"classes", parse_classes(a.classes)}};
  write_config(a.out, "classify", resolved);

  out << std::left << std::setw(28) << "method" << std::setw(7) << "shots" << std::setw(10)
      << "accuracy" << std::setw(10) << "ci95" << "rate\n";
  for (const auto& m : methods) {
    for (std::size_t shots : a.shots) {
      FewShotConfig cfg;
      cfg.shots_per_class = shots;
      cfg.test_samples = a.test_samples;
      cfg.trials = a.trials;
      cfg.k = a.k;
      cfg.seed = a.seed;
      RunOptions ropts;
      ropts.workers = a.workers;
      ropts.separator = a.separator;
      ropts.symmetrize = a.symmetrize;
      const std::string stem = "report_" + slug(m.spec) + "_" + std::to_string(shots) + "shot";
      if (a.save_matrices && !a.out.empty()) ropts.matrix_dir = fs::path(a.out) / (stem + "_matrices");
      ExperimentReport report;
      try {
        report = m.latent ? run_experiment(ds, cfg, *m.latent, ropts)
                          : run_experiment(ds, cfg, *m.compressor, ropts);
      } catch (const ExperimentFailure& e) {
        if (!a.out.empty()) write_report(e.partial(), fs::path(a.out) / (stem + ".partial.json"));
        throw;
      }
      if (!a.out.empty()) write_report(report, fs::path(a.out) / (stem + ".json"));
      out << std::setw(28) << m.spec << std::setw(7) << shots << std::setw(10)
          << fixed(report.mean_accuracy, 4) << std::setw(10) << fixed(report.ci95, 4)
          << (report.compression_rate ? fixed(*report.compression_rate, 4) : "-") << '\n';
    }
  }
  return 0;
}

// ---- roundtrip ------------------------------------------------------------

struct RoundtripArgs {
  std::vector<std::string> models{"uniform", "order0", "order2"};
  std::size_t cases = 1000;
  std::uint64_t seed = 0;
  std::size_t max_length = 4096;
  bool corrupt = false;
  bool list = false;
  std::string out;
};

std::vector<Symbol> fuzz_case(std::uint64_t seed, std::size_t index, std::size_t max_length) {
  SplitMix64 rng(trial_seed(seed, index));
  const std::size_t n = static_cast<std::size_t>(rng.below(max_length + 1));
  std::vector<Symbol> s(n);
  switch (rng.below(4)) {
    case 0:  // uniform bytes
      for (auto& x : s) x = static_cast<Symbol>(rng.below(256));
      break;
    case 1: {  // small alphabet
      const auto alphabet = 1 + rng.below(8);
      for (auto& x : s) x = static_cast<Symbol>('a' + rng.below(alphabet));
      break;
    }
    case 2:  // one symbol, long runs
      for (auto& x : s) x = rng.below(64) == 0 ? static_cast<Symbol>(rng.below(256)) : 0x41;
      break;
    default: {  // repeated phrase with noise
      std::vector<Symbol> phrase(1 + rng.below(24));
      for (auto& x : phrase) x = static_cast<Symbol>(rng.below(256));
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = rng.below(32) == 0 ? static_cast<Symbol>(rng.below(256)) : phrase[i % phrase.size()];
      }
    }
  }
  return s;
}

std::uint64_t fnv1a(const std::vector<Symbol>& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (Symbol x : s) {
    h ^= x;
    h *= 0x100000001b3ull;
  }
  return h;
}

int cmd_roundtrip(const RoundtripArgs& a, std::ostream& out) {
  std::vector<std::pair<std::string, ModelFactory>> models;
  for (const auto& name : a.models) {
    auto f = builtin_model_factory(name);
    if (!f) raise(ErrorKind::usage, "unknown model \"" + name + "\"");
    models.emplace_back(name, std::move(*f));
  }
  json summary = json::object();
  std::size_t total_failures = 0;
  for (const auto& [name, factory] : models) {
    std::size_t passed = 0;
    std::size_t bound_violations = 0;
    json failures = json::array();
    for (std::size_t i = 0; i < a.cases; ++i) {
      const auto symbols = fuzz_case(a.seed, i, a.max_length);
      if (a.list) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(symbols)));
        out << name << ' ' << i << ' ' << symbols.size() << ' ' << buf << '\n';
      }
      auto enc_model = factory();
      CodedStream stream = encode(*enc_model, symbols);
      const double slack = 8.0 * static_cast<double>(stream.byte_length()) - stream.ideal_bits;
      if (slack < 0.0 || slack > 33.0) ++bound_violations;
      if (a.corrupt && !stream.bytes.empty()) {
        stream.bytes[stream.bytes.size() / 2] ^= 0x10;
      }
      std::string failure;
      try {
        auto dec_model = factory();
        if (decode(*dec_model, stream) != symbols) failure = "mismatch";
      } catch (const Error& e) {
        failure = std::string(to_string(e.kind())) + ": " + e.what();
      }
      if (failure.empty()) {
        ++passed;
      } else {
        failures.push_back({{"case", i}, {"length", symbols.size()}, {"reason", failure}});
      }
    }
    const std::size_t failed = a.cases - passed;
    total_failures += failed + bound_violations;
    out << name << ": " << passed << '/' << a.cases << " round-trips passed";
    if (bound_violations) out << ", " << bound_violations << " length-bound violations";
    out << '\n';
    summary[name] = {{"cases", a.cases},
                     {"passed", passed},
                     {"bound_violations", bound_violations},
                     {"failures", failures}};
  }
  if (!a.out.empty()) {
    ensure_dir(a.out);
    write_file(fs::path(a.out) / "roundtrip.json", summary.dump(2) + "\n");
    write_config(a.out, "roundtrip",
                 {{"models", a.models},
                  {"cases", a.cases},
                  {"seed", a.seed},
                  {"max_length", a.max_length},
                  {"corrupt", a.corrupt}});
  }
  if (total_failures > 0) {
    raise(ErrorKind::corrupt_stream,
          std::to_string(total_failures) + " round-trip failures" +
              (a.corrupt ? " (corruption was injected)" : ""));
  }
  return 0;
}

// ---- plotdata -------------------------------------------------------------

struct PlotArgs {
  std::vector<std::string> reports;
  std::string out;
};

int cmd_plotdata(const PlotArgs& a, std::ostream& out) {
  if (a.reports.empty()) raise(ErrorKind::usage, "plotdata needs at least one report");
  std::vector<ExperimentReport> reports;
  for (const auto& p : a.reports) {
    if (!fs::exists(p)) raise(ErrorKind::usage, "report not found: " + p);
    reports.push_back(read_report(p));
  }
  std::ostringstream csv;
  write_plot_csv(reports, csv);
  out << csv.str();
  if (!a.out.empty()) {
    ensure_dir(a.out);
    write_file(fs::path(a.out) / "plot.csv", csv.str());
    write_config(a.out, "plotdata", {{"reports", a.reports}});
  }
  return 0;
}

void emit_error(std::ostream& err, std::string_view kind, const std::string& message) {
  json j = {{"error", {{"kind", std::string(kind)}, {"message", message}}}};
  err << j.dump() << '\n';
}

void emit_error(std::ostream& err, ErrorKind kind, const std::string& message) {
  emit_error(err, to_string(kind), message);
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage:
      return 2;
    case ErrorKind::io:
    case ErrorKind::parse:
    case ErrorKind::schema:
      return 3;
    case ErrorKind::bridge:
    case ErrorKind::protocol:
    case ErrorKind::timeout:
      return 4;
    default:
      return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compression-distance text classification toolkit", "ncdkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "Compression rate of each compressor on each dataset");
  rate_cmd->add_option("-d,--dataset", rate.datasets, "Dataset file (.jsonl or .csv)")->required();
  rate_cmd->add_option("-c,--compressor", rate.compressors, "Compressor spec")
      ->capture_default_str();
  rate_cmd->add_option("--classes", rate.classes, "Comma-separated labels or a preset (20news)");
  rate_cmd->add_option("--split", rate.split, "Documents to include")
      ->check(CLI::IsMember({"all", "train", "test"}))
      ->capture_default_str();
  rate_cmd->add_option("-o,--out", rate.out, "Output directory");
  rate_cmd->add_option("--bridge", rate.bridge, "Model bridge endpoint (default $NCDKIT_BRIDGE)");

  ClassifyArgs cls;
  auto* cls_cmd = app.add_subcommand("classify", "Few-shot kNN classification");
  cls_cmd->add_option("-d,--dataset", cls.dataset, "Dataset file (.jsonl or .csv)")->required();
  cls_cmd->add_option("-c,--compressor,--method", cls.methods,
                      "gzip, zstd, lzma, ac:<model>, ac:lm@<endpoint> or latent@<endpoint>:<pooling>")
      ->capture_default_str();
  cls_cmd->add_option("-s,--shots", cls.shots, "Train documents per class")
      ->delimiter(',')
      ->capture_default_str();
  cls_cmd->add_option("--test-samples", cls.test_samples)->capture_default_str();
  cls_cmd->add_option("--trials", cls.trials)->capture_default_str()->check(CLI::PositiveNumber);
  cls_cmd->add_option("-k", cls.k, "Neighbors")->capture_default_str()->check(CLI::PositiveNumber);
  cls_cmd->add_option("--seed", cls.seed)->capture_default_str();
  cls_cmd->add_option("-j,--workers", cls.workers, "Threads (0 = all cores)")->capture_default_str();
  cls_cmd->add_option("--separator", cls.separator, "Inserted between concatenated documents");
  cls_cmd->add_flag("--symmetrize", cls.symmetrize, "Use min(C(xy), C(yx))");
  cls_cmd->add_flag("--normalize", cls.normalize, "Unit-normalize latent vectors");
  cls_cmd->add_flag("--save-matrices", cls.save_matrices, "Write distance matrices under --out");
  cls_cmd->add_option("--classes", cls.classes, "Comma-separated labels or a preset (20news)");
  cls_cmd->add_option("-o,--out", cls.out, "Output directory");
  cls_cmd->add_option("--bridge", cls.bridge, "Model bridge endpoint (default $NCDKIT_BRIDGE)");

  RoundtripArgs rt;
  auto* rt_cmd = app.add_subcommand("roundtrip", "Randomized encode/decode check of built-in models");
  rt_cmd->add_option("-m,--model", rt.models, "Built-in model")->capture_default_str();
  rt_cmd->add_option("-n,--cases", rt.cases)->capture_default_str();
  rt_cmd->add_option("--seed", rt.seed)->capture_default_str();
  rt_cmd->add_option("--max-length", rt.max_length)->capture_default_str();
  rt_cmd->add_flag("--corrupt", rt.corrupt, "Flip a bit in every stream before decoding");
  rt_cmd->add_flag("--list", rt.list, "Print every case (model, index, length, hash)");
  rt_cmd->add_option("-o,--out", rt.out, "Output directory");

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plotdata", "CSV of accuracy against shots and rate");
  plot_cmd->add_option("reports", plot.reports, "Report JSON files");
  plot_cmd->add_option("-o,--out", plot.out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, ErrorKind::usage, e.what());
    return exit_code(ErrorKind::usage);
  }

  try {
    if (rate_cmd->parsed()) return cmd_rate(rate, out);
    if (cls_cmd->parsed()) return cmd_classify(cls, out);
    if (rt_cmd->parsed()) return cmd_roundtrip(rt, out);
    if (plot_cmd->parsed()) return cmd_plotdata(plot, out);
  } catch (const Error& e) {
    emit_error(err, e.kind(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace ncdkit::cli
