#include "litho/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <unordered_map>

#include "litho/dataset.hpp"
#include "litho/error.hpp"

namespace litho::bench {

std::string_view to_string(MotifKind kind) {
  switch (kind) {
    case MotifKind::min_space_pair: return "min_space_pair";
    case MotifKind::pinch: return "pinch";
    case MotifKind::mixed: return "mixed";
  }
  return "mixed";
}

MotifKind motif_kind_from_string(std::string_view name) {
  if (name == "min_space_pair") return MotifKind::min_space_pair;
  if (name == "pinch") return MotifKind::pinch;
  if (name == "mixed") return MotifKind::mixed;
  throw Error(ErrorKind::config, "bench", "motif_kind", "unknown motif kind '" + std::string(name) + "'");
}

namespace {

constexpr Coord kInset = 20;     // keeps 40 nm between shapes of neighbouring tiles
constexpr Coord kMinSpace = 40;  // legal spacing
constexpr Coord kJitter = 0;

Coord tiles_x(const SynthConfig& c) { return c.width_nm / c.tile_nm; }
Coord tiles_y(const SynthConfig& c) { return c.height_nm / c.tile_nm; }
Coord block_columns(const SynthConfig& c) {
  return (tiles_x(c) + c.duplication - 1) / c.duplication;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, "bench", "SynthConfig", msg); };
  if (tile_nm < 8 * kInset) fail("tile too small for the motif library");
  if (width_nm <= 0 || height_nm <= 0 || width_nm % tile_nm != 0 || height_nm % tile_nm != 0) {
    fail("width and height must be positive multiples of the tile size");
  }
  if (!(rect_density >= 0.0 && rect_density <= 1.0)) fail("rect_density must lie in [0, 1]");
  if (!(hotspot_rate_target > 0.0 && hotspot_rate_target < 1.0)) fail("hotspot_rate_target must lie in (0, 1)");
  if (!(decoy_ratio >= 0.0)) fail("decoy_ratio must be non-negative");
  if (background_variants < 0) fail("background_variants must be non-negative");
  if (duplication < 1 || duplication > tiles_x(*this)) fail("duplication must lie in [1, tile columns]");
  const Coord block_tiles = block_columns(*this) * tiles_y(*this);
  const int motifs = resolved_motif_count();
  if (motifs < 0) fail("motif_count must be non-negative");
  const auto decoys = static_cast<Coord>(std::llround(decoy_ratio * motifs));
  if (motifs + decoys > block_tiles) {
    fail("motif_count (" + std::to_string(motifs) + ") plus decoys exceed the " + std::to_string(block_tiles) +
         " available tiles");
  }
}

int SynthConfig::resolved_motif_count() const {
  if (motif_count) return *motif_count;
  const Coord block_tiles = block_columns(*this) * tiles_y(*this);
  return static_cast<int>(std::llround(hotspot_rate_target * static_cast<double>(block_tiles)));
}

namespace {

/// Shapes of one tile in tile-local coordinates.
struct TileContent {
  std::vector<Rect> rects;
  std::vector<DefectMarker> defects;
};

class TileMaker {
 public:
  TileMaker(Coord tile, std::mt19937_64& rng) : tile_(tile), hi_(tile - kInset), rng_(rng) {}

  Coord uniform(Coord lo, Coord hi) { return std::uniform_int_distribution<Coord>(lo, hi)(rng_); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }
  // motif placement offset around the tile center
  Coord jitter() { return uniform(-kJitter, kJitter); }

  TileContent background() {
    TileContent t;
    switch (uniform(0, 2)) {
      case 0: t.rects = lines(); break;
      case 1: t.rects = transpose(lines()); break;
      default: t.rects = blocks(); break;
    }
    return t;
  }

  TileContent motif(MotifKind kind, bool hotspot) {
    if (kind == MotifKind::mixed) kind = chance(0.5) ? MotifKind::min_space_pair : MotifKind::pinch;
    TileContent t = kind == MotifKind::pinch ? pinch(hotspot) : space_pair(hotspot);
    if (chance(0.5)) {
      t.rects = transpose(std::move(t.rects));
      for (auto& d : t.defects) std::swap(d.x, d.y);
    }
    if (!hotspot) t.defects.clear();
    return t;
  }

 private:
  static std::vector<Rect> transpose(std::vector<Rect> rects) {
    for (auto& r : rects) r = Rect{r.y0, r.x0, r.y1, r.x1};
    return rects;
  }

  // horizontal wires, some cut into two segments
  std::vector<Rect> lines() {
    std::vector<Rect> out;
    Coord y = kInset + uniform(0, 20);
    while (true) {
      const Coord w = 2 * uniform(12, 20);
      if (y + w > hi_) break;
      const Coord x0 = kInset + uniform(0, 4) * 10;
      const Coord x1 = hi_ - uniform(0, 4) * 10;
      if (x1 - x0 > 3 * kMinSpace + 40 && chance(0.3)) {
        const Coord cut = uniform(x0 + kMinSpace, x1 - 2 * kMinSpace - 30);
        const Coord gap = uniform(kMinSpace, kMinSpace + 30);
        out.push_back({x0, y, cut, y + w});
        out.push_back({cut + gap, y, x1, y + w});
      } else {
        out.push_back({x0, y, x1, y + w});
      }
      y += w + uniform(kMinSpace, kMinSpace + 30);
    }
    return out;
  }

  std::vector<Rect> blocks() {
    std::vector<Rect> out;
    const int want = static_cast<int>(uniform(1, 4));
    for (int attempt = 0; attempt < 40 && static_cast<int>(out.size()) < want; ++attempt) {
      const Coord w = uniform(30, 90), h = uniform(30, 90);
      if (kInset + w > hi_ || kInset + h > hi_) continue;
      const Coord x = uniform(kInset, hi_ - w), y = uniform(kInset, hi_ - h);
      const Rect r{x, y, x + w, y + h};
      const Rect grown{r.x0 - kMinSpace, r.y0 - kMinSpace, r.x1 + kMinSpace, r.y1 + kMinSpace};
      if (std::none_of(out.begin(), out.end(), [&](const Rect& o) { return o.overlaps(grown); })) out.push_back(r);
    }
    return out;
  }

  // Two wires facing each other across a gap: tip-to-tip or side-by-side.
  TileContent space_pair(bool hotspot) {
    TileContent t;
    const Coord gap = hotspot ? uniform(8, 16) : uniform(40, 60);
    const Coord w = 2 * uniform(12, 20);
    if (chance(0.5)) {
      const Coord y = tile_ / 2 - w / 2 + jitter();
      const Coord c = tile_ / 2 + jitter();
      const Coord left = c - gap / 2;
      t.rects.push_back({kInset, y, left, y + w});
      t.rects.push_back({left + gap, y, hi_, y + w});
      t.defects.push_back({c, y + w / 2, DefectKind::bridge});
    } else {
      const Coord y = tile_ / 2 - w - gap / 2 + jitter();
      const Coord a0 = kInset + uniform(0, 20), a1 = tile_ / 2 + uniform(30, 60);
      const Coord b0 = tile_ / 2 - uniform(30, 60), b1 = hi_ - uniform(0, 20);
      t.rects.push_back({a0, y, a1, y + w});
      t.rects.push_back({b0, y + w + gap, b1, y + 2 * w + gap});
      const Coord ox0 = std::max(a0, b0), ox1 = std::min(a1, b1);
      t.defects.push_back({(ox0 + ox1) / 2, y + w + gap / 2, DefectKind::bridge});
    }
    return t;
  }

  // A wire narrowed to a neck over a short length.
  TileContent pinch(bool hotspot) {
    TileContent t;
    const Coord w = 2 * uniform(16, 20);
    const Coord neck = hotspot ? uniform(8, 12) : uniform(22, 26);
    const Coord len = uniform(20, 40);
    const Coord y = tile_ / 2 - w / 2 + jitter();
    const Coord c = tile_ / 2 + jitter();
    const Coord n0 = c - len / 2, n1 = n0 + len;
    const Coord ny = y + (w - neck) / 2;
    t.rects.push_back({kInset, y, n0, y + w});
    t.rects.push_back({n0, ny, n1, ny + neck});
    t.rects.push_back({n1, y, hi_, y + w});
    t.defects.push_back({c, ny + neck / 2, DefectKind::neck});
    return t;
  }

  Coord tile_;
  Coord hi_;
  std::mt19937_64& rng_;
};

}  // namespace

Layout generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  TileMaker maker(cfg.tile_nm, rng);

  const Coord bw = block_columns(cfg), th = tiles_y(cfg);
  const auto block_tiles = static_cast<std::size_t>(bw * th);
  const auto motifs = static_cast<std::size_t>(cfg.resolved_motif_count());
  const auto decoys = static_cast<std::size_t>(std::llround(cfg.decoy_ratio * static_cast<double>(motifs)));

  std::vector<std::size_t> order(block_tiles);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  enum class Role : std::uint8_t { background, hotspot, decoy };
  std::vector<Role> role(block_tiles, Role::background);
  for (std::size_t i = 0; i < motifs; ++i) role[order[i]] = Role::hotspot;
  for (std::size_t i = motifs; i < motifs + decoys; ++i) role[order[i]] = Role::decoy;

  std::vector<TileContent> library(static_cast<std::size_t>(cfg.background_variants));
  for (auto& t : library) t = maker.background();

  std::vector<TileContent> block(block_tiles);
  for (std::size_t i = 0; i < block_tiles; ++i) {
    switch (role[i]) {
      case Role::hotspot: block[i] = maker.motif(cfg.motif_kind, true); break;
      case Role::decoy: block[i] = maker.motif(cfg.motif_kind, false); break;
      case Role::background:
        if (!maker.chance(cfg.rect_density)) break;
        if (library.empty()) {
          block[i] = maker.background();
        } else {
          block[i] = library[static_cast<std::size_t>(maker.uniform(0, static_cast<Coord>(library.size()) - 1))];
        }
        break;
    }
    if (role[i] == Role::hotspot && block[i].defects.size() != 1) {
      throw Error(ErrorKind::internal, "bench", "generate_synthetic", "motif without a single defect");
    }
  }

  Layout layout;
  layout.bbox = {0, 0, cfg.width_nm, cfg.height_nm};
  for (Coord ty = 0; ty < th; ++ty) {
    for (Coord tx = 0; tx < tiles_x(cfg); ++tx) {
      const TileContent& t = block[static_cast<std::size_t>(ty * bw + tx % bw)];
      const Coord ox = tx * cfg.tile_nm, oy = ty * cfg.tile_nm;
      for (const auto& r : t.rects) layout.rects.push_back({r.x0 + ox, r.y0 + oy, r.x1 + ox, r.y1 + oy});
      for (const auto& d : t.defects) layout.defects.push_back({d.x + ox, d.y + oy, d.kind});
    }
  }
  layout.validate();
  return layout;
}

// ---------------------------------------------------------------------------

LithoOracle::LithoOracle(const Layout& layout, const std::vector<Clip>& clips, const ClipGeometry& geom) {
  std::vector<Clip> labeled = clips;
  label_all(labeled, layout, geom);
  for (const auto& c : labeled) {
    truth_[c.id] = *c.label;
    seen_[c.id] = false;
    if (*c.label == Label::hotspot) ++total_hotspots_;
  }
}

LithoOracle::LithoOracle(const std::map<ClipId, Label>& truth) : truth_(truth) {
  for (const auto& [id, label] : truth_) {
    seen_[id] = false;
    if (label == Label::hotspot) ++total_hotspots_;
  }
}

Label LithoOracle::query(ClipId id) {
  std::lock_guard lock(mutex_);
  const auto it = truth_.find(id);
  if (it == truth_.end()) throw Error(ErrorKind::oracle, "bench", "oracle_label", "unknown clip id", {id});
  bool& seen = seen_[id];
  if (!seen) {
    seen = true;
    ++count_;
  }
  return it->second;
}

long LithoOracle::litho_count() const {
  std::lock_guard lock(mutex_);
  return count_;
}

bool LithoOracle::charged(ClipId id) const {
  std::lock_guard lock(mutex_);
  const auto it = seen_.find(id);
  return it != seen_.end() && it->second;
}

Label LithoOracle::truth(ClipId id) const {
  const auto it = truth_.find(id);
  if (it == truth_.end()) throw Error(ErrorKind::oracle, "bench", "truth", "unknown clip id", {id});
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXf predict_columns(const learner::MlpModel& model, const Eigen::MatrixXf& inputs,
                                const std::vector<Eigen::Index>& cols) {
  constexpr std::size_t chunk = 512;
  Eigen::VectorXf out(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t s = 0; s < cols.size(); s += chunk) {
    const std::size_t e = std::min(cols.size(), s + chunk);
    Eigen::MatrixXf x(inputs.rows(), static_cast<Eigen::Index>(e - s));
    for (std::size_t i = s; i < e; ++i) x.col(static_cast<Eigen::Index>(i - s)) = inputs.col(cols[i]);
    out.segment(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(e - s)) = learner::predict_proba(model, x);
  }
  return out;
}

double ratio(long hits, long total) { return total == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(total); }

long elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
}

std::vector<Eigen::Index> complement(Eigen::Index total, const std::vector<Eigen::Index>& taken) {
  std::vector<char> mark(static_cast<std::size_t>(total), 0);
  for (const auto c : taken) mark[static_cast<std::size_t>(c)] = 1;
  std::vector<Eigen::Index> rest;
  for (Eigen::Index c = 0; c < total; ++c) {
    if (!mark[static_cast<std::size_t>(c)]) rest.push_back(c);
  }
  return rest;
}

}  // namespace

RunMetrics evaluate(const learner::MlpModel& model, const sampler::ClipDataset& data,
                    const std::vector<Eigen::Index>& labeled, const std::vector<Eigen::Index>& discarded,
                    LithoOracle& oracle) {
  RunMetrics m;
  m.total_hotspots = oracle.total_hotspots();
  m.clips = static_cast<long>(oracle.size());
  for (const auto c : labeled) {
    const ClipId id = data.ids[static_cast<std::size_t>(c)];
    if (oracle.query(id) == Label::hotspot) ++m.hits;
  }
  const Eigen::VectorXf p = predict_columns(model, data.inputs, discarded);
  for (std::size_t i = 0; i < discarded.size(); ++i) {
    if (p(static_cast<Eigen::Index>(i)) < 0.5f) continue;
    const ClipId id = data.ids[static_cast<std::size_t>(discarded[i])];
    if (oracle.query(id) == Label::hotspot) {
      ++m.hits;
    } else {
      ++m.extras;
    }
  }
  m.accuracy = ratio(m.hits, m.total_hotspots);
  m.litho_clips = oracle.litho_count();
  return m;
}

RunMetrics run_random_baseline(const sampler::ClipDataset& data, LithoOracle& oracle, long budget,
                               const learner::TrainConfig& tcfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  if (budget <= 0 || budget > data.size()) {
    throw Error(ErrorKind::config, "bench", "run_random_baseline", "budget must lie in [1, clip count]");
  }
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(data.size()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Eigen::Index> labeled;
  std::sample(all.begin(), all.end(), std::back_inserter(labeled), budget, rng);

  std::vector<Label> labels(all.size(), Label::non_hotspot);
  for (const auto c : labeled) labels[static_cast<std::size_t>(c)] = oracle.query(data.ids[static_cast<std::size_t>(c)]);
  auto model = learner::init_model<float>(tcfg, static_cast<int>(data.inputs.rows()));
  learner::train_initial(model, data.inputs, labels, labeled, tcfg, rng);

  RunMetrics m = evaluate(model, data, labeled, complement(data.size(), labeled), oracle);
  m.method = "random";
  m.seed = seed;
  m.wall_time_ms = elapsed_ms(start);
  return m;
}

RunMetrics run_greedy_baseline(const sampler::ClipDataset& data, LithoOracle& oracle,
                               const std::vector<Eigen::Index>& initial, const learner::TrainConfig& tcfg,
                               std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  std::vector<Label> labels(static_cast<std::size_t>(data.size()), Label::non_hotspot);
  std::vector<Eigen::Index> labeled = initial;
  for (const auto c : labeled) labels[static_cast<std::size_t>(c)] = oracle.query(data.ids[static_cast<std::size_t>(c)]);
  auto model = learner::init_model<float>(tcfg, static_cast<int>(data.inputs.rows()));
  learner::train_initial(model, data.inputs, labels, labeled, tcfg, rng);

  std::vector<Eigen::Index> pool = complement(data.size(), labeled);
  while (!pool.empty()) {
    const Eigen::VectorXf p = predict_columns(model, data.inputs, pool);
    std::vector<Eigen::Index> hot, rest;
    for (std::size_t i = 0; i < pool.size(); ++i) (p(static_cast<Eigen::Index>(i)) >= 0.5f ? hot : rest).push_back(pool[i]);
    if (hot.empty()) break;
    for (const auto c : hot) labels[static_cast<std::size_t>(c)] = oracle.query(data.ids[static_cast<std::size_t>(c)]);
    learner::incremental_update(model, data.inputs, labels, labeled, hot, tcfg, rng);
    labeled.insert(labeled.end(), hot.begin(), hot.end());
    pool = std::move(rest);
  }

  RunMetrics m = evaluate(model, data, labeled, pool, oracle);
  m.method = "greedy";
  m.seed = seed;
  m.wall_time_ms = elapsed_ms(start);
  return m;
}

RunMetrics run_exact_match_baseline(const Layout& layout, const std::vector<Clip>& clips, Coord pixel_nm,
                                    LithoOracle& oracle) {
  const auto start = std::chrono::steady_clock::now();
  const RectIndex index(layout, 4 * (clips.empty() ? 230 : clips.front().core.width()));

  auto digest = [](const Bitmap& b) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      h ^= b.data()[i];
      h *= 1099511628211ULL;
    }
    return h;
  };

  // hash -> representative clip indices; bitmaps are compared on collision
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> groups;
  std::vector<std::size_t> rep_of(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const Bitmap b = rasterize(index, clips[i], pixel_nm);
    auto& reps = groups[digest(b)];
    const auto same = std::find_if(reps.begin(), reps.end(), [&](std::size_t r) {
      return (rasterize(index, clips[r], pixel_nm) == b).all();
    });
    if (same == reps.end()) {
      reps.push_back(i);
      rep_of[i] = i;
    } else {
      rep_of[i] = *same;
    }
  }

  RunMetrics m;
  m.method = "exact";
  m.total_hotspots = oracle.total_hotspots();
  m.clips = static_cast<long>(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const Label predicted = oracle.query(clips[rep_of[i]].id);
    if (predicted != Label::hotspot) continue;
    if (oracle.truth(clips[i].id) == Label::hotspot) {
      ++m.hits;
    } else {
      ++m.extras;
    }
  }
  m.accuracy = ratio(m.hits, m.total_hotspots);
  m.litho_clips = oracle.litho_count();
  m.wall_time_ms = elapsed_ms(start);
  return m;
}

ActiveRun run_active(const sampler::ClipDataset& data, LithoOracle& oracle, const learner::TrainConfig& tcfg,
                     const sampler::SamplerConfig& scfg, const sampler::IterationHook& hook) {
  const auto start = std::chrono::steady_clock::now();
  ActiveRun run;
  run.result = sampler::batch_active_sampling(data, oracle, tcfg, scfg, hook);
  run.metrics = evaluate(run.result.model, data, run.result.labeled, run.result.discarded, oracle);
  run.metrics.method = "active";
  run.metrics.seed = scfg.seed;
  run.metrics.wall_time_ms = elapsed_ms(start);
  return run;
}

// ---------------------------------------------------------------------------

void BenchConfig::validate() const {
  synth.validate();
  geometry.validate();
  features.validate();
  train.validate();
  sampler.validate();
  if (synth.tile_nm != geometry.core_nm) {
    throw Error(ErrorKind::config, "bench", "BenchConfig", "synthetic tile size must equal the core size");
  }
  if (geometry.clip_nm % features.grid != 0 || (geometry.clip_nm / features.grid) % features.cell_pixels != 0) {
    throw Error(ErrorKind::config, "bench", "BenchConfig", "clip size must split into grid cells of whole pixels");
  }
  if (seeds.empty()) throw Error(ErrorKind::config, "bench", "BenchConfig", "no seeds");
  for (const auto& method : methods) {
    if (method != "active" && method != "random" && method != "greedy" && method != "exact") {
      throw Error(ErrorKind::config, "bench", "BenchConfig", "unknown method '" + method + "'");
    }
  }
  if (threads < 1) throw Error(ErrorKind::config, "bench", "BenchConfig", "threads must be >= 1");
}

Instance make_instance(const BenchConfig& cfg, std::uint64_t seed) {
  SynthConfig synth = cfg.synth;
  synth.seed = seed;
  Instance inst;
  inst.layout = generate_synthetic(synth);
  inst.clips = dispatch(inst.layout, cfg.geometry);
  label_all(inst.clips, inst.layout, cfg.geometry);
  inst.data = build_dataset(inst.layout, inst.clips, cfg.features, cfg.threads);
  return inst;
}

std::vector<RunMetrics> run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  auto wants = [&](std::string_view m) { return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end(); };
  std::vector<RunMetrics> out;
  for (const auto seed : cfg.seeds) {
    const Instance inst = make_instance(cfg, seed);
    learner::TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    sampler::SamplerConfig scfg = cfg.sampler;
    scfg.seed = seed;

    long budget = 0;
    if (wants("active") || wants("random")) {
      LithoOracle oracle(inst.layout, inst.clips, cfg.geometry);
      ActiveRun run = run_active(inst.data, oracle, tcfg, scfg);
      budget = run.metrics.litho_clips;
      if (wants("active")) out.push_back(run.metrics);
    }
    if (wants("random")) {
      LithoOracle oracle(inst.layout, inst.clips, cfg.geometry);
      out.push_back(run_random_baseline(inst.data, oracle, budget, tcfg, seed));
    }
    if (wants("greedy")) {
      // same initial set as the active run
      std::mt19937_64 rng(scfg.seed);
      const int k0 = std::min<int>(scfg.initial_size > 0 ? scfg.initial_size : scfg.k,
                                   static_cast<int>(inst.data.size()));
      const auto initial = sampler::select_initial(inst.data.init_vectors, k0, scfg, rng);
      LithoOracle oracle(inst.layout, inst.clips, cfg.geometry);
      out.push_back(run_greedy_baseline(inst.data, oracle, initial, tcfg, seed));
    }
    if (wants("exact")) {
      LithoOracle oracle(inst.layout, inst.clips, cfg.geometry);
      RunMetrics m = run_exact_match_baseline(inst.layout, inst.clips, cfg.features.pixel_nm(cfg.geometry.clip_nm),
                                              oracle);
      m.seed = seed;
      out.push_back(m);
    }
  }
  return out;
}

std::string metrics_csv_header(bool with_time) {
  return with_time ? "method,seed,accuracy,hits,extras,litho_clips,wall_time_ms"
                   : "method,seed,accuracy,hits,extras,litho_clips";
}

std::string metrics_csv_row(const RunMetrics& m, bool with_time) {
  char acc[32];
  std::snprintf(acc, sizeof acc, "%.6f", m.accuracy);
  std::string row = m.method + "," + std::to_string(m.seed) + "," + acc + "," + std::to_string(m.hits) + "," +
                    std::to_string(m.extras) + "," + std::to_string(m.litho_clips);
  if (with_time) row += "," + std::to_string(m.wall_time_ms);
  return row;
}

std::vector<CurvePoint> accuracy_curve(const Instance& inst, const BenchConfig& cfg, std::uint64_t seed) {
  LithoOracle oracle(inst.layout, inst.clips, cfg.geometry);
  learner::TrainConfig tcfg = cfg.train;
  tcfg.seed = seed;
  sampler::SamplerConfig scfg = cfg.sampler;
  scfg.seed = seed;

  std::vector<CurvePoint> curve;
  const auto total = inst.data.size();
  auto hook = [&](const sampler::IterationRecord& rec, const sampler::SamplingResult& state) {
    CurvePoint pt;
    pt.iteration = rec.iteration;
    pt.samples_labeled = static_cast<long>(state.labeled.size());
    for (const auto c : state.labeled) {
      if (state.labels[static_cast<std::size_t>(c)] == Label::hotspot) ++pt.hits;
    }
    const auto rest = complement(total, state.labeled);
    const Eigen::VectorXf p = predict_columns(state.model, inst.data.inputs, rest);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (p(static_cast<Eigen::Index>(i)) < 0.5f) continue;
      ++pt.litho_clips;
      if (oracle.truth(inst.data.ids[static_cast<std::size_t>(rest[i])]) == Label::hotspot) {
        ++pt.hits;
      } else {
        ++pt.extras;
      }
    }
    pt.litho_clips += pt.samples_labeled;
    pt.accuracy = ratio(pt.hits, oracle.total_hotspots());
    curve.push_back(pt);
  };
  sampler::batch_active_sampling(inst.data, oracle, tcfg, scfg, hook);
  return curve;
}

std::vector<CurvePoint> accuracy_curve(const BenchConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return accuracy_curve(make_instance(cfg, seed), cfg, seed);
}

std::optional<CurvePoint> first_reaching(const std::vector<CurvePoint>& curve, double target) {
  const auto it = std::find_if(curve.begin(), curve.end(), [&](const CurvePoint& p) { return p.accuracy >= target; });
  if (it == curve.end()) return std::nullopt;
  return *it;
}

}  // namespace litho::bench
