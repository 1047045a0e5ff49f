#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "litho/features.hpp"
#include "litho/layout.hpp"

namespace litho::features {

// Binary layout: "FTNS", u32 count, u32 grid_h, u32 grid_w, u32 channels,
// then count tensors of grid_h * grid_w * channels little-endian f32 each, in
// clip-id order. The JSON sidecar (<path>.json) maps clip id to byte offset
// and carries labels when they are known.
struct FeatureStore {
  int grid_h = 0;
  int grid_w = 0;
  int channels = 0;
  std::vector<ClipId> ids;
  std::vector<FeatureTensor> tensors;
  std::map<ClipId, Label> labels;
};

std::filesystem::path sidecar_path(const std::filesystem::path& store);

void save_feature_store(const std::filesystem::path& path, const FeatureStore& store);
FeatureStore load_feature_store(const std::filesystem::path& path);

}  // namespace litho::features
