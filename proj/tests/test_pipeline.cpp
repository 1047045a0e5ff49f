#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "litho/error.hpp"
#include "litho/feature_store.hpp"
#include "litho/layout_io.hpp"
#include "litho/learner.hpp"
#include "litho/pipeline.hpp"

using namespace litho;
namespace pl = litho::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run cli(const std::string& args) {
  const std::string cmd = std::string(LITHO_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json last_json_line(const std::string& text) {
  const auto start = text.rfind("\n{", text.size() - 2);
  return json::parse(start == std::string::npos ? text : text.substr(start + 1));
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("litho_cli_" + std::to_string(::getpid()) + "_" +
                                                 std::to_string(counter_++))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

json small_config() {
  return {{"synthetic", true},
          {"seed", 3},
          {"synth", {{"width_nm", 12 * 230}, {"height_nm", 10 * 230}}},
          {"learner", {{"epochs_initial", 4}, {"epochs_update", 1}}},
          {"sampler", {{"k", 10}, {"n_query", 16}}}};
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Config, UnknownKeysAreRejected) {
  try {
    pl::pipeline_config_from_json(json{{"sampler", {{"kk", 3}}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  EXPECT_THROW(pl::pipeline_config_from_json(json{{"seed", "one"}}), Error);
  EXPECT_THROW(pl::bench_config_from_json(json{{"seeds", {1}}, {"paths", json::object()}}), Error);
}

TEST(Config, RoundTripsThroughJson) {
  auto cfg = pl::pipeline_config_from_json(small_config());
  cfg.sampler.pool_cap.reset();
  cfg.train.hidden = {16, 8};
  const auto back = pl::pipeline_config_from_json(pl::to_json(cfg));
  EXPECT_EQ(pl::to_json(back), pl::to_json(cfg));
  EXPECT_FALSE(back.sampler.pool_cap);
  EXPECT_EQ(back.synth.width_nm, 12 * 230);
}

TEST(Config, CrossFieldChecksRunFirst) {
  pl::PipelineConfig cfg;
  EXPECT_THROW(cfg.validate(), Error);  // neither synthetic nor a layout
  cfg.synthetic = true;
  EXPECT_NO_THROW(cfg.validate());
  cfg.sampler.k = 100;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.sampler.k = 60;
  cfg.features.grid = 20;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Threads, FlagThenEnvironmentThenOne) {
  ::unsetenv("LITHO_SAMPLER_THREADS");
  EXPECT_EQ(pl::resolve_threads(std::nullopt), 1);
  ::setenv("LITHO_SAMPLER_THREADS", "3", 1);
  EXPECT_EQ(pl::resolve_threads(std::nullopt), 3);
  EXPECT_EQ(pl::resolve_threads(2), 2);
  ::setenv("LITHO_SAMPLER_THREADS", "zero", 1);
  EXPECT_THROW(pl::resolve_threads(std::nullopt), Error);
  ::unsetenv("LITHO_SAMPLER_THREADS");
  EXPECT_THROW(pl::resolve_threads(0), Error);
}

TEST(ExitCodes, PerKind) {
  EXPECT_EQ(pl::exit_code(ErrorKind::io), 2);
  EXPECT_EQ(pl::exit_code(ErrorKind::config), 3);
  const auto j = pl::error_json(Error(ErrorKind::oracle, "bench", "query", "unknown", {4}));
  EXPECT_EQ(j.at("error").at("kind"), "oracle");
  EXPECT_EQ(j.at("error").at("ids"), json::array({4}));
}

TEST(Cli, OpticsCommands) {
  const auto iso = cli("optics iso-distance");
  ASSERT_EQ(iso.code, 0) << iso.out;
  const auto j = json::parse(iso.out);
  EXPECT_NEAR(j.at("isolation_distance_nm").get<double>(), 233.357, 1e-3);
  EXPECT_EQ(j.at("grid_nm").get<double>(), 230.0);
  const auto ee = cli("optics encircled-energy --x 19");
  ASSERT_EQ(ee.code, 0);
  const auto e = json::parse(ee.out);
  EXPECT_NEAR(e.at("encircled_energy").get<double>(), 0.9673, 0.005);
  EXPECT_NEAR(e.at("sixth_dark_ring").at("x").get<double>(), 19.6159, 1e-3);
  EXPECT_GT(e.at("sixth_dark_ring").at("encircled_energy").get<double>(), e.at("encircled_energy").get<double>());
}

TEST(Cli, UnknownFlagIsAConfigError) {
  const auto r = cli("optics iso-distance --bogus 1");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(last_json_line(r.out).at("error").at("kind"), "config");
}

TEST(Cli, MissingLayoutIsAnIoError) {
  TempDir dir;
  const auto r = cli("dispatch --layout " + (dir / "none.json").string() + " --out " + (dir / "c.json").string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_EQ(last_json_line(r.out).at("error").at("kind"), "io");
  EXPECT_FALSE(fs::exists(dir / "c.json"));
}

TEST(Cli, KLargerThanNFailsBeforeWork) {
  TempDir dir;
  const auto r = cli("flow --synthetic --k 91 --n 90 --out-dir " + (dir / "out").string());
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_EQ(last_json_line(r.out).at("error").at("kind"), "config");
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, DispatchExtractSample) {
  TempDir dir;
  bench::SynthConfig s;
  s.width_nm = 10 * 230;
  s.height_nm = 8 * 230;
  save_layout(dir / "layout.json", bench::generate_synthetic(s));

  auto r = cli("dispatch --layout " + (dir / "layout.json").string() + " --out " + (dir / "clips.json").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto clips = clips_from_json(json::parse(read_text(dir / "clips.json")));
  EXPECT_EQ(clips.size(), 80u);

  r = cli("--threads 2 extract --layout " + (dir / "layout.json").string() + " --clips " +
          (dir / "clips.json").string() + " --out " + (dir / "f.ftns").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto store = features::load_feature_store(dir / "f.ftns");
  EXPECT_EQ(store.ids.size(), 80u);
  EXPECT_EQ(store.labels.size(), 80u);
  EXPECT_EQ(store.channels, 16);

  r = cli("sample --features " + (dir / "f.ftns").string() + " --k 8 --n 12 --out " + (dir / "sel.json").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto sel = json::parse(read_text(dir / "sel.json"));
  EXPECT_TRUE(sel.contains("labeled"));
  EXPECT_EQ(sel.at("labeled").size() + sel.at("discarded").size(), 80u);
}

TEST(Cli, FlowArtifactsAndDeterminism) {
  TempDir dir;
  write(dir / "cfg.json", small_config().dump());
  const auto a = cli("flow --config " + (dir / "cfg.json").string() + " --out-dir " + (dir / "a").string());
  ASSERT_EQ(a.code, 0) << a.out;
  const auto b = cli("--threads 2 flow --config " + (dir / "cfg.json").string() + " --out-dir " +
                     (dir / "b").string());
  ASSERT_EQ(b.code, 0) << b.out;
  for (const char* f : {pl::kSelectionLog, pl::kCheckpoint, pl::kMetricsCsv, pl::kRunInfo}) {
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  }
  EXPECT_EQ(read_text(dir / "a" / pl::kMetricsCsv), read_text(dir / "b" / pl::kMetricsCsv));
  EXPECT_EQ(read_text(dir / "a" / pl::kCheckpoint), read_text(dir / "b" / pl::kCheckpoint));
  EXPECT_EQ(read_text(dir / "a" / pl::kSelectionLog), read_text(dir / "b" / pl::kSelectionLog));

  const auto csv = read_text(dir / "a" / pl::kMetricsCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,seed,accuracy,hits,extras,litho_clips");
  const auto model = learner::load_checkpoint(dir / "a" / pl::kCheckpoint);
  EXPECT_EQ(model.dims.front(), 23 * 23 * 16);

  std::ifstream log(dir / "a" / pl::kSelectionLog);
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j.at("iteration").get<int>(), lines);
    ++lines;
  }
  EXPECT_GT(lines, 1);
}

TEST(Cli, BenchCurve) {
  TempDir dir;
  json cfg = small_config();
  cfg.erase("synthetic");
  cfg.erase("seed");
  cfg["seeds"] = {1};
  write(dir / "bench.json", cfg.dump());
  const auto r = cli("bench curve --config " + (dir / "bench.json").string() + " --out " +
                     (dir / "curve.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = read_text(dir / "curve.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,samples_labeled,litho_clips,hits,extras,accuracy");
}
