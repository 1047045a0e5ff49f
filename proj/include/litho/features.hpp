#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "litho/layout.hpp"

namespace litho::features {

/// Orthonormal DCT-II basis: row u holds a(u) cos(pi (2i + 1) u / 2b).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dct_basis(Eigen::Index b) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis(b, b);
  const Scalar scale0 = std::sqrt(Scalar(1) / Scalar(b));
  const Scalar scale = std::sqrt(Scalar(2) / Scalar(b));
  for (Eigen::Index u = 0; u < b; ++u) {
    for (Eigen::Index i = 0; i < b; ++i) {
      basis(u, i) = (u == 0 ? scale0 : scale) *
                    std::cos(std::numbers::pi_v<Scalar> * Scalar(2 * i + 1) * Scalar(u) / Scalar(2 * b));
    }
  }
  return basis;
}

/// Orthonormal 2D DCT-II of a square block.
template <typename Derived>
auto dct2(const Eigen::MatrixBase<Derived>& block) {
  using Scalar = typename Derived::Scalar;
  const auto basis = dct_basis<Scalar>(block.rows());
  return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(basis * block * basis.transpose());
}

/// Inverse of dct2.
template <typename Derived>
auto idct2(const Eigen::MatrixBase<Derived>& coeffs) {
  using Scalar = typename Derived::Scalar;
  const auto basis = dct_basis<Scalar>(coeffs.rows());
  return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(basis.transpose() * coeffs * basis);
}

/// JPEG zig-zag traversal of a b x b block as (row, col) pairs, DC first.
std::vector<std::pair<int, int>> zigzag_order(int b);

/// grid_h x grid_w blocks, each holding the first `channels` zig-zag DCT
/// coefficients. Element (i, j, c) lives at (i * grid_w + j) * channels + c.
struct FeatureTensor {
  int grid_h = 0;
  int grid_w = 0;
  int channels = 0;
  Eigen::VectorXd data;

  double& at(int i, int j, int c) { return data[(static_cast<Eigen::Index>(i) * grid_w + j) * channels + c]; }
  double at(int i, int j, int c) const {
    return data[(static_cast<Eigen::Index>(i) * grid_w + j) * channels + c];
  }
};

/// Unit-L2 (or all-zero) feature vector.
using FeatureVector = Eigen::VectorXd;

struct FeatureConfig {
  int grid = 23;         // blocks per side
  int cell_pixels = 10;  // raster pixels per block side
  int channels = 16;
  int init_channel = 1;  // zig-zag index used for the initial diversity vectors

  /// Raster pitch for a clip of the given side; throws Error{config} unless
  /// clip_nm splits evenly into grid * cell_pixels pixels.
  Coord pixel_nm(Coord clip_nm) const;
  void validate() const;
};

/// Block-wise DCT feature tensor of a binary raster.
FeatureTensor extract_tensor(const Bitmap& bitmap, int grid, int channels);

/// Flattens channel c row-major and L2-normalizes; the zero slice maps to zero.
FeatureVector channel_vector(const FeatureTensor& tensor, int channel);

/// Rasterizes and extracts one clip.
FeatureTensor clip_tensor(const RectIndex& index, const Clip& clip, const FeatureConfig& cfg);

}  // namespace litho::features
