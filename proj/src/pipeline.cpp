#include "litho/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <set>
#include <sstream>

#include "litho/dataset.hpp"
#include "litho/feature_store.hpp"
#include "litho/layout_io.hpp"

namespace litho::pipeline {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& op, const std::string& msg) {
  throw Error(ErrorKind::config, "cli", op, msg);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error("config", where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) config_error("config", "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void read_geometry(const json& j, ClipGeometry& g) {
  check_keys(j, "geometry", {"clip_nm", "stride_nm", "core_nm", "min_margin_nm"});
  read(j, "clip_nm", g.clip_nm);
  read(j, "stride_nm", g.stride_nm);
  read(j, "core_nm", g.core_nm);
  read(j, "min_margin_nm", g.min_margin_nm);
}

void read_features(const json& j, features::FeatureConfig& f) {
  check_keys(j, "features", {"grid", "cell_pixels", "channels", "init_channel"});
  read(j, "grid", f.grid);
  read(j, "cell_pixels", f.cell_pixels);
  read(j, "channels", f.channels);
  read(j, "init_channel", f.init_channel);
}

void read_learner(const json& j, learner::TrainConfig& t) {
  check_keys(j, "learner", {"alpha", "sigma", "batch_size", "epochs_initial", "epochs_update", "eps0",
                            "total_bias_steps", "hidden"});
  read(j, "alpha", t.alpha);
  read(j, "sigma", t.sigma);
  read(j, "batch_size", t.batch_size);
  read(j, "epochs_initial", t.epochs_initial);
  read(j, "epochs_update", t.epochs_update);
  read(j, "eps0", t.eps0);
  read(j, "total_bias_steps", t.total_bias_steps);
  read(j, "hidden", t.hidden);
}

void read_sampler(const json& j, sampler::SamplerConfig& s) {
  check_keys(j, "sampler", {"n_query", "k", "pool_cap", "qp_tol", "qp_max_iters", "initial_size"});
  read(j, "n_query", s.n_query);
  read(j, "k", s.k);
  if (j.contains("pool_cap")) {
    if (j.at("pool_cap").is_null()) {
      s.pool_cap.reset();
    } else {
      s.pool_cap = j.at("pool_cap").get<int>();
    }
  }
  read(j, "qp_tol", s.qp_tol);
  read(j, "qp_max_iters", s.qp_max_iters);
  read(j, "initial_size", s.initial_size);
}

void read_synth(const json& j, bench::SynthConfig& s) {
  check_keys(j, "synth", {"width_nm", "height_nm", "tile_nm", "rect_density", "background_variants", "motif_count", "hotspot_rate_target",
                          "decoy_ratio", "motif_kind", "duplication"});
  read(j, "width_nm", s.width_nm);
  read(j, "height_nm", s.height_nm);
  read(j, "tile_nm", s.tile_nm);
  read(j, "rect_density", s.rect_density);
  read(j, "background_variants", s.background_variants);
  if (j.contains("motif_count") && !j.at("motif_count").is_null()) s.motif_count = j.at("motif_count").get<int>();
  read(j, "hotspot_rate_target", s.hotspot_rate_target);
  read(j, "decoy_ratio", s.decoy_ratio);
  if (j.contains("motif_kind")) s.motif_kind = bench::motif_kind_from_string(j.at("motif_kind").get<std::string>());
  read(j, "duplication", s.duplication);
}

json geometry_json(const ClipGeometry& g) {
  return {{"clip_nm", g.clip_nm}, {"stride_nm", g.stride_nm}, {"core_nm", g.core_nm},
          {"min_margin_nm", g.min_margin_nm}};
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, "cli", "config", e.what());
  }
}

void check_feature_geometry(const ClipGeometry& geom, const features::FeatureConfig& fcfg) {
  geom.validate();
  fcfg.validate();
  (void)fcfg.pixel_nm(geom.clip_nm);
}

// Clips without a label take it from the layout's defect markers.
std::map<ClipId, Label> fill_labels(const Layout& layout, std::vector<Clip>& clips) {
  std::map<ClipId, Label> truth;
  for (auto& c : clips) {
    if (!c.label) c.label = label_clip(c, layout.defects);
    if (!truth.emplace(c.id, *c.label).second) {
      throw Error(ErrorKind::format, "layout", "clips", "duplicate clip id", {c.id});
    }
  }
  return truth;
}

std::string selection_log(const sampler::SamplingResult& result, const sampler::ClipDataset& data,
                          std::uint64_t seed) {
  std::ostringstream out;
  // labeled = L0 followed by the batches in order
  std::size_t batched = 0;
  for (const auto& r : result.log) batched += r.selected_ids.size();
  json initial = json::array();
  for (std::size_t i = 0; i + batched < result.labeled.size(); ++i) {
    initial.push_back(data.ids[static_cast<std::size_t>(result.labeled[i])]);
  }
  const json head = {{"iteration", 0}, {"seed", seed}, {"selected_ids", initial}};
  out << head.dump() << "\n";
  for (const auto& r : result.log) {
    out << json{{"iteration", r.iteration},
                {"selected_ids", r.selected_ids},
                {"f_relaxed", r.f_relaxed},
                {"f_rounded", r.f_rounded},
                {"lambda_max", r.lambda_max},
                {"gap_bound", r.gap_bound},
                {"litho_total", r.litho_total}}
               .dump()
        << "\n";
  }
  return out.str();
}

}  // namespace

void PipelineConfig::validate() const {
  if (!synthetic && !layout_path) config_error("validate", "either --synthetic or a layout path is required");
  if (synthetic && (layout_path || clips_path)) config_error("validate", "synthetic runs take no input paths");
  if (threads < 1) config_error("validate", "threads must be >= 1");
  check_feature_geometry(geometry, features);
  train.validate();
  sampler.validate();
  if (synthetic) {
    synth.validate();
    if (synth.tile_nm != geometry.core_nm) config_error("validate", "synthetic tile size must equal core_nm");
  }
}

PipelineConfig pipeline_config_from_json(const json& j) {
  return guarded([&] {
    check_keys(j, "config", {"seed", "threads", "synthetic", "paths", "geometry", "features", "learner", "sampler",
                             "synth"});
    PipelineConfig cfg;
    read(j, "seed", cfg.seed);
    read(j, "threads", cfg.threads);
    read(j, "synthetic", cfg.synthetic);
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      check_keys(p, "paths", {"layout", "clips", "out_dir"});
      if (p.contains("layout")) cfg.layout_path = p.at("layout").get<std::string>();
      if (p.contains("clips")) cfg.clips_path = p.at("clips").get<std::string>();
      if (p.contains("out_dir")) cfg.out_dir = p.at("out_dir").get<std::string>();
    }
    if (j.contains("geometry")) read_geometry(j.at("geometry"), cfg.geometry);
    if (j.contains("features")) read_features(j.at("features"), cfg.features);
    if (j.contains("learner")) read_learner(j.at("learner"), cfg.train);
    if (j.contains("sampler")) read_sampler(j.at("sampler"), cfg.sampler);
    if (j.contains("synth")) read_synth(j.at("synth"), cfg.synth);
    return cfg;
  });
}

bench::BenchConfig bench_config_from_json(const json& j) {
  return guarded([&] {
    check_keys(j, "bench config", {"seeds", "methods", "threads", "geometry", "features", "learner", "sampler",
                                   "synth"});
    bench::BenchConfig cfg;
    read(j, "seeds", cfg.seeds);
    read(j, "methods", cfg.methods);
    read(j, "threads", cfg.threads);
    if (j.contains("geometry")) read_geometry(j.at("geometry"), cfg.geometry);
    if (j.contains("features")) read_features(j.at("features"), cfg.features);
    if (j.contains("learner")) read_learner(j.at("learner"), cfg.train);
    if (j.contains("sampler")) read_sampler(j.at("sampler"), cfg.sampler);
    if (j.contains("synth")) read_synth(j.at("synth"), cfg.synth);
    return cfg;
  });
}

json to_json(const PipelineConfig& cfg) {
  json paths = {{"out_dir", cfg.out_dir.string()}};
  if (cfg.layout_path) paths["layout"] = cfg.layout_path->string();
  if (cfg.clips_path) paths["clips"] = cfg.clips_path->string();
  const auto& t = cfg.train;
  const auto& s = cfg.sampler;
  const auto& y = cfg.synth;
  return {
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"synthetic", cfg.synthetic},
      {"paths", paths},
      {"geometry", geometry_json(cfg.geometry)},
      {"features",
       {{"grid", cfg.features.grid},
        {"cell_pixels", cfg.features.cell_pixels},
        {"channels", cfg.features.channels},
        {"init_channel", cfg.features.init_channel}}},
      {"learner",
       {{"alpha", t.alpha},
        {"sigma", t.sigma},
        {"batch_size", t.batch_size},
        {"epochs_initial", t.epochs_initial},
        {"epochs_update", t.epochs_update},
        {"eps0", t.eps0},
        {"total_bias_steps", t.total_bias_steps},
        {"hidden", t.hidden}}},
      {"sampler",
       {{"n_query", s.n_query},
        {"k", s.k},
        {"pool_cap", s.pool_cap ? json(*s.pool_cap) : json(nullptr)},
        {"qp_tol", s.qp_tol},
        {"qp_max_iters", s.qp_max_iters},
        {"initial_size", s.initial_size}}},
      {"synth",
       {{"width_nm", y.width_nm},
        {"height_nm", y.height_nm},
        {"tile_nm", y.tile_nm},
        {"rect_density", y.rect_density},
        {"background_variants", y.background_variants},
        {"motif_count", y.motif_count ? json(*y.motif_count) : json(nullptr)},
        {"hotspot_rate_target", y.hotspot_rate_target},
        {"decoy_ratio", y.decoy_ratio},
        {"motif_kind", std::string(bench::to_string(y.motif_kind))},
        {"duplication", y.duplication}}},
  };
}

namespace {

json parse_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, "cli", "load_config", path.string() + ": " + e.what());
  }
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) { return pipeline_config_from_json(parse_file(path)); }

bench::BenchConfig load_bench_config(const fs::path& path) { return bench_config_from_json(parse_file(path)); }

bench::RunMetrics run_flow(const PipelineConfig& in) {
  const auto start = std::chrono::steady_clock::now();
  in.validate();
  PipelineConfig cfg = in;
  cfg.synth.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.sampler.seed = cfg.seed;

  Layout layout;
  std::vector<Clip> clips;
  if (cfg.synthetic) {
    layout = bench::generate_synthetic(cfg.synth);
  } else {
    layout = load_layout(*cfg.layout_path);
  }
  if (cfg.clips_path) {
    const std::string text = read_text(*cfg.clips_path);
    try {
      clips = clips_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::format, "layout", "clips_from_json", e.what());
    }
  } else {
    clips = dispatch(layout, cfg.geometry);
  }
  const auto truth = fill_labels(layout, clips);
  const auto data = build_dataset(layout, clips, cfg.features, cfg.threads);

  bench::LithoOracle oracle(truth);
  bench::ActiveRun run = bench::run_active(data, oracle, cfg.train, cfg.sampler);
  run.metrics.seed = cfg.seed;

  const std::string csv =
      bench::metrics_csv_header(false) + "\n" + bench::metrics_csv_row(run.metrics, false) + "\n";
  const std::string log = selection_log(run.result, data, cfg.seed);
  const std::string ckpt = learner::checkpoint_bytes(run.result.model);
  json info = {{"seed", cfg.seed},
               {"clips", data.size()},
               {"total_hotspots", run.metrics.total_hotspots},
               {"litho_clips", run.metrics.litho_clips},
               {"train_steps", run.result.train_steps},
               {"wall_time_ms", 0},
               {"config", to_json(cfg)}};

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cli", "flow", "cannot create " + cfg.out_dir.string());
  run.metrics.wall_time_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  info["wall_time_ms"] = run.metrics.wall_time_ms;
  write_atomic(cfg.out_dir / kSelectionLog, log);
  write_atomic(cfg.out_dir / kCheckpoint, ckpt);
  write_atomic(cfg.out_dir / kRunInfo, info.dump(2) + "\n");
  write_atomic(cfg.out_dir / kMetricsCsv, csv);
  return run.metrics;
}

std::size_t cmd_dispatch(const fs::path& layout_path, const ClipGeometry& geom, const fs::path& out) {
  geom.validate();
  const Layout layout = load_layout(layout_path);
  auto clips = dispatch(layout, geom);
  label_all(clips, layout, geom);
  write_atomic(out, clips_to_json(clips).dump() + "\n");
  return clips.size();
}

std::size_t cmd_extract(const fs::path& layout_path, const std::optional<fs::path>& clips_path,
                        const ClipGeometry& geom, const features::FeatureConfig& fcfg, int threads,
                        const fs::path& out) {
  check_feature_geometry(geom, fcfg);
  const Layout layout = load_layout(layout_path);
  std::vector<Clip> clips;
  if (clips_path) {
    try {
      clips = clips_from_json(json::parse(read_text(*clips_path)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::format, "layout", "clips_from_json", e.what());
    }
  } else {
    clips = dispatch(layout, geom);
  }
  std::sort(clips.begin(), clips.end(), [](const Clip& a, const Clip& b) { return a.id < b.id; });

  features::FeatureStore store;
  store.grid_h = store.grid_w = fcfg.grid;
  store.channels = fcfg.channels;
  const auto truth = fill_labels(layout, clips);
  const RectIndex index(layout, 4 * geom.core_nm);
  store.tensors.resize(clips.size());
  parallel_for(clips.size(), threads, [&](std::size_t i) { store.tensors[i] = features::clip_tensor(index, clips[i], fcfg); });
  for (const auto& c : clips) store.ids.push_back(c.id);
  store.labels = truth;
  features::save_feature_store(out, store);
  return clips.size();
}

sampler::SamplingResult cmd_sample(const fs::path& features_path, const features::FeatureConfig& fcfg,
                                   const learner::TrainConfig& tcfg, const sampler::SamplerConfig& scfg,
                                   const fs::path& out) {
  scfg.validate();
  tcfg.validate();
  const auto store = features::load_feature_store(features_path);
  if (store.labels.size() != store.ids.size()) {
    throw Error(ErrorKind::oracle, "cli", "sample", "feature store lacks labels for some clips");
  }
  const auto data = dataset_from_store(store, fcfg);
  bench::LithoOracle oracle(store.labels);
  auto result = sampler::batch_active_sampling(data, oracle, tcfg, scfg);

  json j = {{"seed", scfg.seed}, {"litho_clips", oracle.litho_count()}};
  json labeled = json::array(), discarded = json::array();
  for (const auto c : result.labeled) labeled.push_back(data.ids[static_cast<std::size_t>(c)]);
  for (const auto c : result.discarded) discarded.push_back(data.ids[static_cast<std::size_t>(c)]);
  j["labeled"] = labeled;
  j["discarded"] = discarded;
  json iterations = json::array();
  for (const auto& r : result.log) {
    iterations.push_back({{"iteration", r.iteration}, {"selected_ids", r.selected_ids}, {"f_relaxed", r.f_relaxed},
                          {"f_rounded", r.f_rounded}, {"gap_bound", r.gap_bound}});
  }
  j["iterations"] = iterations;
  write_atomic(out, j.dump(2) + "\n");
  return result;
}

void cmd_bench_run(const bench::BenchConfig& cfg, const fs::path& out) {
  const auto rows = bench::run_benchmark(cfg);
  std::string csv = bench::metrics_csv_header(true) + "\n";
  for (const auto& r : rows) csv += bench::metrics_csv_row(r, true) + "\n";
  write_atomic(out, csv);
}

void cmd_bench_curve(const bench::BenchConfig& cfg, std::uint64_t seed, const fs::path& out) {
  const auto curve = bench::accuracy_curve(cfg, seed);
  std::string csv = "iteration,samples_labeled,litho_clips,hits,extras,accuracy\n";
  char buf[128];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%d,%ld,%ld,%ld,%ld,%.6f\n", p.iteration, p.samples_labeled, p.litho_clips, p.hits,
                  p.extras, p.accuracy);
    csv += buf;
  }
  write_atomic(out, csv);
}

json error_json(const Error& e) {
  return {{"error",
           {{"kind", std::string(to_string(e.kind()))},
            {"module", e.module()},
            {"op", e.op()},
            {"message", e.what()},
            {"ids", e.ids()}}}};
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return 2;
    case ErrorKind::config: return 3;
    case ErrorKind::format: return 4;
    case ErrorKind::domain: return 5;
    case ErrorKind::training: return 6;
    case ErrorKind::oracle: return 7;
    case ErrorKind::internal: return 8;
  }
  return 1;
}

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) config_error("threads", "--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("LITHO_SAMPLER_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) config_error("threads", "LITHO_SAMPLER_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

}  // namespace litho::pipeline
