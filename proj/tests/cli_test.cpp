#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "markov_corpus.hpp"
#include "ncdkit/harness/experiment.hpp"

namespace ncdkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("ncdkit_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_kind(const std::string& err) {
  return json::parse(err).at("error").at("kind").get<std::string>();
}

std::string fixture(const std::string& name) {
  return std::string(NCDKIT_FIXTURE_DIR) + "/datasets/" + name;
}

fs::path write_markov_dataset(const fs::path& dir, const std::string& name = "markov") {
  testing::MarkovCorpusConfig cfg;
  cfg.docs_per_class = 40;
  const Dataset ds = testing::make_markov_corpus(cfg);
  const fs::path p = dir / (name + ".jsonl");
  std::ofstream f(p, std::ios::binary);
  for (const auto& d : ds.documents) {
    f << json{{"text", d.text}, {"label", ds.class_names[d.label]}}.dump() << '\n';
  }
  return p;
}

TEST(Cli, ExitCodesByKind) {
  EXPECT_EQ(cli::exit_code(ErrorKind::usage), 2);
  EXPECT_EQ(cli::exit_code(ErrorKind::io), 3);
  EXPECT_EQ(cli::exit_code(ErrorKind::schema), 3);
  EXPECT_EQ(cli::exit_code(ErrorKind::bridge), 4);
  EXPECT_EQ(cli::exit_code(ErrorKind::timeout), 4);
  EXPECT_EQ(cli::exit_code(ErrorKind::corrupt_stream), 1);
}

TEST(Cli, RateWithUniformCoderIsExact) {
  // 4 documents of 52 bytes in total; each uniform stream costs one extra byte.
  const auto dir = scratch("rate");
  const auto r = run({"rate", "-d", fixture("tiny.jsonl"), "-c", "ac:uniform", "-o", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("1.076923"), std::string::npos);
  EXPECT_EQ(slurp(dir / "rates.csv"),
            "compressor,dataset,rate,documents,bytes,compressed\n"
            "ac:uniform,tiny,1.0769230769230769,4,52,56\n");
  const auto config = json::parse(slurp(dir / "config.json"));
  EXPECT_EQ(config.at("split"), "all");

  const auto train = run({"rate", "-d", fixture("tiny.jsonl"), "-c", "ac:uniform",
                          "--split", "test"});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find(std::to_string(13.0 / 12.0).substr(0, 8)), std::string::npos);
}

TEST(Cli, UsageErrors) {
  auto r = run({"rate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r.err), "usage");

  r = run({"rate", "-d", fixture("tiny.jsonl"), "-c", "brotli"});
  EXPECT_EQ(r.code, 2);

  r = run({"rate", "-d", fixture("does_not_exist.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r.err), "usage");

  r = run({"rate", "-d", fixture("malformed.jsonl")});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_kind(r.err), "parse");

  r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, HelpAndVersion) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("classify"), std::string::npos);
  r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(r.out.empty());
}

TEST(Cli, ClassifyWritesReproducibleReports) {
  const auto dir = scratch("classify");
  const auto data = write_markov_dataset(dir);
  auto invoke = [&](const fs::path& out, const std::string& workers) {
    return run({"classify", "-d", data.string(), "-c", "gzip", "-s", "3", "--test-samples", "20",
                "--trials", "5", "-j", workers, "-o", out.string()});
  };
  const auto a = invoke(dir / "a", "1");
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = invoke(dir / "b", "3");
  ASSERT_EQ(b.code, 0) << b.err;

  const auto ra = read_report(dir / "a" / "report_gzip_3shot.json");
  const auto rb = read_report(dir / "b" / "report_gzip_3shot.json");
  EXPECT_EQ(ra.trials.size(), 5u);
  EXPECT_EQ(ra.dataset, "markov");
  EXPECT_EQ(report_to_json(ra, false), report_to_json(rb, false));
  EXPECT_TRUE(fs::exists(dir / "a" / "config.json"));
}

TEST(Cli, LatentWithoutBridgeIsBridgeError) {
  ::unsetenv("NCDKIT_BRIDGE");
  auto r = run({"classify", "-d", fixture("tiny.jsonl"), "-c", "latent:mean_tokens", "-s", "1",
                "--test-samples", "1"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(error_kind(r.err), "bridge");

  r = run({"classify", "-d", fixture("tiny.jsonl"), "-c", "latent@unix:/nonexistent.sock:final_state",
           "-s", "1", "--test-samples", "1"});
  EXPECT_EQ(r.code, 4);

  r = run({"classify", "-d", fixture("tiny.jsonl"), "-c", "latent@:mean_tokens"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, InsufficientPopulationIsReported) {
  const auto r = run({"classify", "-d", fixture("tiny.jsonl"), "-s", "5"});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(error_kind(r.err), "insufficient_population");
}

TEST(Cli, RoundtripListIsReproducible) {
  const std::vector<std::string> args{"roundtrip", "-m", "order2", "-n", "12", "--seed", "9",
                                      "--max-length", "300", "--list"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("order2: 12/12 round-trips passed"), std::string::npos);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 13);
  std::vector<std::string> other = args;
  other[6] = "10";
  EXPECT_NE(run(other).out, a.out);
}

TEST(Cli, RoundtripReportsInjectedCorruption) {
  const auto r = run({"roundtrip", "-m", "order0", "-n", "20", "--max-length", "500", "--corrupt"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_kind(r.err), "corrupt_stream");
  EXPECT_EQ(r.out.find("20/20"), std::string::npos);
}

TEST(Cli, PlotdataRowsAndWarnings) {
  const auto dir = scratch("plot");
  const auto data = write_markov_dataset(dir);
  ASSERT_EQ(run({"classify", "-d", data.string(), "-c", "gzip", "-s", "2,4", "--test-samples",
                 "10", "--trials", "2", "-o", (dir / "m").string()})
                .code,
            0);
  const auto other = write_markov_dataset(dir, "other");
  ASSERT_EQ(run({"classify", "-d", other.string(), "-c", "gzip", "-s", "2", "--test-samples",
                 "10", "--trials", "2", "-o", (dir / "n").string()})
                .code,
            0);

  const auto two = run({"plotdata", (dir / "m" / "report_gzip_2shot.json").string(),
                        (dir / "m" / "report_gzip_4shot.json").string(), "-o",
                        (dir / "p").string()});
  ASSERT_EQ(two.code, 0) << two.err;
  EXPECT_EQ(std::count(two.out.begin(), two.out.end(), '\n'), 3);
  EXPECT_EQ(slurp(dir / "p" / "plot.csv"), two.out);
  EXPECT_EQ(two.out.find("differs"), std::string::npos);

  const auto mixed = run({"plotdata", (dir / "m" / "report_gzip_2shot.json").string(),
                          (dir / "n" / "report_gzip_2shot.json").string()});
  ASSERT_EQ(mixed.code, 0);
  EXPECT_NE(mixed.out.find("dataset differs from markov"), std::string::npos);

  const auto none = run({"plotdata"});
  EXPECT_EQ(none.code, 2);
  EXPECT_EQ(run({"plotdata", (dir / "missing.json").string()}).code, 2);
}

}  // namespace
}  // namespace ncdkit
