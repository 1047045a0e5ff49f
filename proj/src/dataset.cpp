#include "litho/dataset.hpp"

#include "litho/error.hpp"

namespace litho {

Eigen::VectorXf model_input(const features::FeatureTensor& tensor, int cell_pixels) {
  return (tensor.data / static_cast<double>(cell_pixels)).cast<float>();
}

sampler::ClipDataset build_dataset(const Layout& layout, const std::vector<Clip>& clips,
                                   const features::FeatureConfig& cfg, int threads,
                                   std::vector<features::FeatureTensor>* tensors) {
  cfg.validate();
  sampler::ClipDataset data;
  const auto n = static_cast<Eigen::Index>(clips.size());
  const Eigen::Index cells = static_cast<Eigen::Index>(cfg.grid) * cfg.grid;
  data.inputs.resize(cells * cfg.channels, n);
  data.init_vectors.resize(cells, n);
  data.ids.reserve(clips.size());
  for (const auto& c : clips) data.ids.push_back(c.id);
  if (tensors) tensors->assign(clips.size(), {});

  const RectIndex index(layout, 4 * (clips.empty() ? 230 : clips.front().core.width()));
  parallel_for(clips.size(), threads, [&](std::size_t i) {
    auto t = features::clip_tensor(index, clips[i], cfg);
    const auto col = static_cast<Eigen::Index>(i);
    data.inputs.col(col) = model_input(t, cfg.cell_pixels);
    data.init_vectors.col(col) = features::channel_vector(t, cfg.init_channel);
    if (tensors) (*tensors)[i] = std::move(t);
  });
  return data;
}

sampler::ClipDataset dataset_from_store(const features::FeatureStore& store, const features::FeatureConfig& cfg) {
  if (cfg.init_channel >= store.channels) {
    throw Error(ErrorKind::config, "features", "dataset_from_store", "init channel not present in the store");
  }
  sampler::ClipDataset data;
  const auto n = static_cast<Eigen::Index>(store.tensors.size());
  data.ids = store.ids;
  data.inputs.resize(static_cast<Eigen::Index>(store.grid_h) * store.grid_w * store.channels, n);
  data.init_vectors.resize(static_cast<Eigen::Index>(store.grid_h) * store.grid_w, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = store.tensors[static_cast<std::size_t>(i)];
    data.inputs.col(i) = model_input(t, cfg.cell_pixels);
    data.init_vectors.col(i) = features::channel_vector(t, cfg.init_channel);
  }
  return data;
}

}  // namespace litho
