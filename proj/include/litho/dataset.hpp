#pragma once

#include <vector>

#include "litho/feature_store.hpp"
#include "litho/features.hpp"
#include "litho/layout.hpp"
#include "litho/sampler.hpp"

namespace litho {

/// Model input for one tensor: the flattened tensor scaled by 1 / cell_pixels
/// so the DC term of a block lies in [0, 1].
Eigen::VectorXf model_input(const features::FeatureTensor& tensor, int cell_pixels);

/// Rasterizes and extracts every clip, filling model inputs and the unit
/// init-channel vectors. Column j corresponds to clips[j]. Work is split over
/// `threads` workers; output does not depend on the thread count.
sampler::ClipDataset build_dataset(const Layout& layout, const std::vector<Clip>& clips,
                                   const features::FeatureConfig& cfg, int threads = 1,
                                   std::vector<features::FeatureTensor>* tensors = nullptr);

/// Same from a loaded feature store.
sampler::ClipDataset dataset_from_store(const features::FeatureStore& store, const features::FeatureConfig& cfg);

/// Runs fn(i) for i in [0, count) on up to `threads` threads.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn);

}  // namespace litho

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

namespace litho {

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), 1,
                                                      std::max<std::size_t>(1, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace litho
