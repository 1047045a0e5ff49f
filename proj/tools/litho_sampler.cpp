// Command-line entry point: dispatch -> extract -> sample/train -> detect -> report.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "litho/optics.hpp"
#include "litho/pipeline.hpp"

namespace pl = litho::pipeline;
using nlohmann::json;

namespace {

struct GeometryFlags {
  litho::ClipGeometry geom;
  void attach(CLI::App* cmd) {
    cmd->add_option("--clip", geom.clip_nm, "Clip side in nm")->capture_default_str();
    cmd->add_option("--stride", geom.stride_nm, "Scan stride in nm")->capture_default_str();
    cmd->add_option("--core", geom.core_nm, "Core side in nm")->capture_default_str();
  }
};

struct FeatureFlags {
  litho::features::FeatureConfig cfg;
  void attach(CLI::App* cmd) {
    cmd->add_option("--grid", cfg.grid, "DCT blocks per clip side")->capture_default_str();
    cmd->add_option("--cell-pixels", cfg.cell_pixels, "Raster pixels per block side")->capture_default_str();
    cmd->add_option("--channels", cfg.channels, "Zig-zag coefficients kept per block")->capture_default_str();
    cmd->add_option("--init-channel", cfg.init_channel, "Channel used for the initial diversity set")
        ->capture_default_str();
  }
};

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// k/n near 1/2 maximizes the rounding allowance; legal but worth flagging.
void warn_ratio(const litho::sampler::SamplerConfig& cfg) {
  if (!cfg.near_half_ratio()) return;
  std::cerr << json{{"warning", "k/n is close to 0.5, where the rounding bound is loosest"},
                    {"k", cfg.k},
                    {"n", cfg.n_query}}
                   .dump()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layout pattern sampling and hotspot detection"};
  app.require_subcommand(1);
  app.allow_extras(false);
  std::optional<int> threads_flag;
  app.add_option("--threads", threads_flag, "Worker threads (default: $LITHO_SAMPLER_THREADS or 1)");

  // optics
  auto* optics = app.add_subcommand("optics", "Diffraction helpers");
  optics->require_subcommand(1);
  litho::optics::LithoSystem sys;
  auto* iso = optics->add_subcommand("iso-distance", "Isolation distance D = 6.05 lambda / NA");
  iso->add_option("--lambda", sys.wavelength_nm, "Wavelength in nm")
      ->capture_default_str();
  iso->add_option("--na", sys.numerical_aperture, "Numerical aperture")->capture_default_str();
  double grid_nm = 10.0;
  iso->add_option("--grid", grid_nm, "Layout grid in nm")->capture_default_str();
  auto* ee = optics->add_subcommand("encircled-energy", "Airy encircled energy at k r sin(theta)");
  double ee_x = 19.0;
  ee->add_option("--x", ee_x, "Argument k r sin(theta)")->capture_default_str();

  // dispatch
  auto* dispatch = app.add_subcommand("dispatch", "Cut a layout into labeled clips");
  std::string layout_path, out_path;
  GeometryFlags dispatch_geom;
  dispatch->add_option("--layout", layout_path, "Layout JSON")->required();
  dispatch_geom.attach(dispatch);
  dispatch->add_option("--out", out_path, "Clip-set JSON to write")->required();

  // extract
  auto* extract = app.add_subcommand("extract", "Compute the block-DCT feature store");
  std::optional<std::string> clips_path;
  GeometryFlags extract_geom;
  FeatureFlags extract_feat;
  extract->add_option("--layout", layout_path, "Layout JSON")->required();
  extract->add_option("--clips", clips_path, "Clip-set JSON (default: dispatch the layout)");
  extract_geom.attach(extract);
  extract_feat.attach(extract);
  extract->add_option("--out", out_path, "Feature store to write")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "Batch active sampling on a labeled feature store");
  std::string features_path;
  litho::sampler::SamplerConfig scfg;
  litho::learner::TrainConfig tcfg;
  FeatureFlags sample_feat;
  int pool_cap = *scfg.pool_cap;
  sample->add_option("--features", features_path, "Feature store")->required();
  sample->add_option("--k", scfg.k, "Clips labeled per iteration")->capture_default_str();
  sample->add_option("--n", scfg.n_query, "Query-set size")->capture_default_str();
  sample->add_option("--pool-cap", pool_cap, "Pool subsample size before scoring (0 = no cap)")
      ->capture_default_str();
  sample->add_option("--seed", scfg.seed, "Run seed")->capture_default_str();
  sample->add_option("--init-channel", sample_feat.cfg.init_channel, "Channel for the initial set")
      ->capture_default_str();
  sample->add_option("--out", out_path, "Selection JSON to write")->required();

  // flow
  auto* flow = app.add_subcommand("flow", "Full sampling and detection flow");
  std::optional<std::string> flow_config, flow_layout, flow_clips, flow_out;
  std::optional<std::uint64_t> flow_seed;
  std::optional<int> flow_k, flow_n;
  bool flow_synthetic = false;
  flow->add_option("--config", flow_config, "Pipeline config JSON");
  flow->add_flag("--synthetic", flow_synthetic, "Run on a generated benchmark layout");
  flow->add_option("--layout", flow_layout, "Layout JSON");
  flow->add_option("--clips", flow_clips, "Pre-cut clip-set JSON");
  flow->add_option("--seed", flow_seed, "Run seed");
  flow->add_option("--k", flow_k, "Clips labeled per iteration");
  flow->add_option("--n", flow_n, "Query-set size");
  flow->add_option("--out-dir", flow_out, "Artifact directory");

  // bench
  auto* bench = app.add_subcommand("bench", "Synthetic benchmark harness");
  bench->require_subcommand(1);
  std::optional<std::string> bench_config;
  auto* bench_run = bench->add_subcommand("run", "All methods over all seeds");
  bench_run->add_option("--config", bench_config, "Bench config JSON");
  bench_run->add_option("--out", out_path, "Results CSV")->required();
  auto* bench_curve = bench->add_subcommand("curve", "Accuracy after every sampling iteration");
  std::uint64_t curve_seed = 1;
  bench_curve->add_option("--config", bench_config, "Bench config JSON");
  bench_curve->add_option("--seed", curve_seed, "Benchmark seed")->capture_default_str();
  bench_curve->add_option("--out", out_path, "Curve CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << pl::error_json(litho::Error(litho::ErrorKind::config, "cli", "parse", e.what())).dump() << "\n";
    return pl::exit_code(litho::ErrorKind::config);
  }

  try {
    const int threads = pl::resolve_threads(threads_flag);

    if (iso->parsed()) {
      const double d = litho::optics::isolation_distance(sys);
      print({{"isolation_distance_nm", d}, {"grid_nm", litho::optics::snap_down(d, grid_nm)}});
    } else if (ee->parsed()) {
      const double ring6 = litho::optics::bessel_j1_zero(6);
      print({{"x", ee_x},
             {"encircled_energy", litho::optics::encircled_energy_at(ee_x)},
             {"sixth_dark_ring", {{"x", ring6}, {"encircled_energy", litho::optics::encircled_energy_at(ring6)}}}});
    } else if (dispatch->parsed()) {
      const auto n = pl::cmd_dispatch(layout_path, dispatch_geom.geom, out_path);
      print({{"clips", n}, {"out", out_path}});
    } else if (extract->parsed()) {
      std::optional<pl::fs::path> clips;
      if (clips_path) clips = *clips_path;
      const auto n = pl::cmd_extract(layout_path, clips, extract_geom.geom, extract_feat.cfg, threads, out_path);
      print({{"clips", n}, {"out", out_path}});
    } else if (sample->parsed()) {
      if (pool_cap > 0) {
        scfg.pool_cap = pool_cap;
      } else {
        scfg.pool_cap.reset();
      }
      tcfg.seed = scfg.seed;
      warn_ratio(scfg);
      const auto result = pl::cmd_sample(features_path, sample_feat.cfg, tcfg, scfg, out_path);
      print({{"labeled", result.labeled.size()}, {"discarded", result.discarded.size()}, {"out", out_path}});
    } else if (flow->parsed()) {
      pl::PipelineConfig cfg = flow_config ? pl::load_pipeline_config(*flow_config) : pl::PipelineConfig{};
      if (flow_synthetic) cfg.synthetic = true;
      if (flow_layout) cfg.layout_path = *flow_layout;
      if (flow_clips) cfg.clips_path = *flow_clips;
      if (flow_seed) cfg.seed = *flow_seed;
      if (flow_k) cfg.sampler.k = *flow_k;
      if (flow_n) cfg.sampler.n_query = *flow_n;
      if (flow_out) cfg.out_dir = *flow_out;
      if (threads_flag || !flow_config) cfg.threads = threads;
      warn_ratio(cfg.sampler);
      const auto m = pl::run_flow(cfg);
      print({{"accuracy", m.accuracy},
             {"hits", m.hits},
             {"extras", m.extras},
             {"litho_clips", m.litho_clips},
             {"clips", m.clips},
             {"out_dir", cfg.out_dir.string()}});
    } else if (bench_run->parsed() || bench_curve->parsed()) {
      litho::bench::BenchConfig cfg = bench_config ? pl::load_bench_config(*bench_config) : litho::bench::BenchConfig{};
      if (threads_flag || !bench_config) cfg.threads = threads;
      if (bench_run->parsed()) {
        pl::cmd_bench_run(cfg, out_path);
      } else {
        pl::cmd_bench_curve(cfg, curve_seed, out_path);
      }
      print({{"out", out_path}});
    }
  } catch (const litho::Error& e) {
    std::cerr << pl::error_json(e).dump() << "\n";
    return pl::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << pl::error_json(litho::Error(litho::ErrorKind::internal, "cli", "main", e.what())).dump() << "\n";
    return 1;
  }
  return 0;
}
