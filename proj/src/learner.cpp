#include "litho/learner.hpp"

#include <bit>
#include <cstring>

#include "litho/layout_io.hpp"

namespace litho::learner {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

constexpr char kMagic[4] = {'M', 'L', 'P', '1'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) {
    throw Error(ErrorKind::format, "learner", "load_checkpoint", "truncated checkpoint");
  }
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(alpha > 0.0)) throw Error(ErrorKind::config, "learner", "TrainConfig", "alpha must be positive");
  if (!(sigma > 0.0)) throw Error(ErrorKind::config, "learner", "TrainConfig", "sigma must be positive");
  if (!(eps0 >= 0.0 && eps0 < 0.5)) {
    throw Error(ErrorKind::config, "learner", "TrainConfig", "eps0 must lie in [0, 0.5)");
  }
  if (batch_size <= 0) throw Error(ErrorKind::config, "learner", "TrainConfig", "batch_size must be positive");
  if (epochs_initial < 0 || epochs_update < 0) {
    throw Error(ErrorKind::config, "learner", "TrainConfig", "epochs must be non-negative");
  }
  if (hidden.empty()) throw Error(ErrorKind::config, "learner", "TrainConfig", "need at least one hidden layer");
  for (int h : hidden) {
    if (h <= 0) throw Error(ErrorKind::config, "learner", "TrainConfig", "hidden sizes must be positive");
  }
}

Target bias_target(Label label, long t, const TrainConfig& cfg) {
  if (label == Label::hotspot) return {1.0, 0.0};
  double eps = 0.0;
  if (cfg.total_bias_steps > 0) {
    eps = cfg.eps0 * std::max(0.0, 1.0 - static_cast<double>(t) / static_cast<double>(cfg.total_bias_steps));
  }
  return {eps, 1.0 - eps};
}

long steps_for(std::size_t count, int epochs, const TrainConfig& cfg) {
  if (count == 0 || epochs <= 0) return 0;
  const std::size_t bs = static_cast<std::size_t>(std::max(1, cfg.batch_size));
  return static_cast<long>(epochs) * static_cast<long>((count + bs - 1) / bs);
}

std::string checkpoint_bytes(const MlpModel& m) {
  std::string out;
  out.append(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.dims.size()));
  for (int d : m.dims) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (const auto& layer : m.layers) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) put<float>(out, layer.weight(i, j));
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) put<float>(out, layer.bias(i));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& m) {
  write_atomic(path, checkpoint_bytes(m));
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::format, "learner", "load_checkpoint", path.string() + " is not a checkpoint");
  }
  std::size_t pos = 4;
  MlpModel m;
  const auto count = get<std::uint32_t>(bytes, pos);
  if (count < 2 || count > 64) throw Error(ErrorKind::format, "learner", "load_checkpoint", "bad layer count");
  for (std::uint32_t i = 0; i < count; ++i) m.dims.push_back(static_cast<int>(get<std::uint32_t>(bytes, pos)));
  for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
    MlpModel::Layer layer;
    layer.weight.resize(m.dims[l + 1], m.dims[l]);
    layer.bias.resize(m.dims[l + 1]);
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = get<float>(bytes, pos);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = get<float>(bytes, pos);
    m.layers.push_back(std::move(layer));
  }
  if (pos != bytes.size()) throw Error(ErrorKind::format, "learner", "load_checkpoint", "trailing bytes");
  return m;
}

}  // namespace litho::learner
