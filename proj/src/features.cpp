#include "litho/features.hpp"

#include <algorithm>
#include <string>

#include "litho/error.hpp"

namespace litho::features {

std::vector<std::pair<int, int>> zigzag_order(int b) {
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<std::size_t>(b) * b);
  for (int s = 0; s <= 2 * (b - 1); ++s) {
    const int lo = std::max(0, s - (b - 1));
    const int hi = std::min(s, b - 1);
    if (s % 2 == 0) {
      for (int row = hi; row >= lo; --row) order.emplace_back(row, s - row);
    } else {
      for (int row = lo; row <= hi; ++row) order.emplace_back(row, s - row);
    }
  }
  return order;
}

void FeatureConfig::validate() const {
  if (grid <= 0 || cell_pixels <= 0) {
    throw Error(ErrorKind::config, "features", "config", "grid and cell_pixels must be positive");
  }
  if (channels < 2 || channels > cell_pixels * cell_pixels) {
    throw Error(ErrorKind::config, "features", "config",
                "channels must lie in [2, cell_pixels^2], got " + std::to_string(channels));
  }
  if (init_channel < 0 || init_channel >= channels) {
    throw Error(ErrorKind::config, "features", "config", "init_channel out of range");
  }
}

Coord FeatureConfig::pixel_nm(Coord clip_nm) const {
  validate();
  const Coord pixels = static_cast<Coord>(grid) * cell_pixels;
  if (clip_nm % pixels != 0) {
    throw Error(ErrorKind::config, "features", "config",
                "clip side " + std::to_string(clip_nm) + " nm does not split into " +
                    std::to_string(pixels) + " pixels");
  }
  return clip_nm / pixels;
}

FeatureTensor extract_tensor(const Bitmap& bitmap, int grid, int channels) {
  if (grid <= 0 || bitmap.rows() != bitmap.cols() || bitmap.rows() % grid != 0) {
    throw Error(ErrorKind::config, "features", "extract_tensor",
                "bitmap side must be divisible by the grid count");
  }
  const int block = static_cast<int>(bitmap.rows() / grid);
  if (channels < 1 || channels > block * block) {
    throw Error(ErrorKind::config, "features", "extract_tensor",
                "channels must lie in [1, block_side^2]");
  }

  const auto order = zigzag_order(block);
  int max_row = 0;
  int max_col = 0;
  for (int c = 0; c < channels; ++c) {
    max_row = std::max(max_row, order[static_cast<std::size_t>(c)].first);
    max_col = std::max(max_col, order[static_cast<std::size_t>(c)].second);
  }
  // only the leading basis rows/cols feed the kept coefficients
  const Eigen::MatrixXd basis = dct_basis<double>(block);
  const Eigen::MatrixXd rows = basis.topRows(max_row + 1);
  const Eigen::MatrixXd cols = basis.topRows(max_col + 1).transpose();

  FeatureTensor t;
  t.grid_h = grid;
  t.grid_w = grid;
  t.channels = channels;
  t.data = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid) * grid * channels);

  Eigen::MatrixXd pixels(block, block);
  Eigen::MatrixXd coeffs(max_row + 1, max_col + 1);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      pixels = bitmap.block(i * block, j * block, block, block).cast<double>().matrix();
      if (pixels.isZero()) continue;
      coeffs.noalias() = rows * pixels * cols;
      for (int c = 0; c < channels; ++c) {
        const auto [u, v] = order[static_cast<std::size_t>(c)];
        t.at(i, j, c) = coeffs(u, v);
      }
    }
  }
  return t;
}

FeatureVector channel_vector(const FeatureTensor& tensor, int channel) {
  if (channel < 0 || channel >= tensor.channels) {
    throw Error(ErrorKind::domain, "features", "channel_vector",
                "channel " + std::to_string(channel) + " out of range");
  }
  FeatureVector v(static_cast<Eigen::Index>(tensor.grid_h) * tensor.grid_w);
  for (int i = 0; i < tensor.grid_h; ++i) {
    for (int j = 0; j < tensor.grid_w; ++j) v[i * tensor.grid_w + j] = tensor.at(i, j, channel);
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

FeatureTensor clip_tensor(const RectIndex& index, const Clip& clip, const FeatureConfig& cfg) {
  const Coord pixel = cfg.pixel_nm(clip.window.width());
  return extract_tensor(rasterize(index, clip, pixel), cfg.grid, cfg.channels);
}

}  // namespace litho::features
