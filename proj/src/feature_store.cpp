#include "litho/feature_store.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "litho/error.hpp"
#include "litho/layout_io.hpp"

namespace litho::features {
namespace {

static_assert(std::endian::native == std::endian::little, "feature store assumes a little-endian host");

constexpr char kMagic[4] = {'F', 'T', 'N', 'S'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v;
  std::memcpy(&v, in.data() + pos, 4);
  return v;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& store) {
  auto p = store;
  p += ".json";
  return p;
}

void save_feature_store(const std::filesystem::path& path, const FeatureStore& store) {
  if (store.ids.size() != store.tensors.size()) {
    throw Error(ErrorKind::internal, "features", "save_store", "ids and tensors differ in length");
  }
  const std::size_t per = static_cast<std::size_t>(store.grid_h) * store.grid_w * store.channels;

  // clip-id order
  std::vector<std::size_t> order(store.ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return store.ids[a] < store.ids[b]; });

  std::string bytes;
  bytes.reserve(kHeaderBytes + order.size() * per * 4);
  bytes.append(kMagic, 4);
  put_u32(bytes, static_cast<std::uint32_t>(store.ids.size()));
  put_u32(bytes, static_cast<std::uint32_t>(store.grid_h));
  put_u32(bytes, static_cast<std::uint32_t>(store.grid_w));
  put_u32(bytes, static_cast<std::uint32_t>(store.channels));

  nlohmann::json offsets = nlohmann::json::object();
  for (const std::size_t k : order) {
    const auto& t = store.tensors[k];
    if (static_cast<std::size_t>(t.data.size()) != per) {
      throw Error(ErrorKind::internal, "features", "save_store", "tensor shape mismatch",
                  {store.ids[k]});
    }
    offsets[std::to_string(store.ids[k])] = bytes.size();
    for (Eigen::Index i = 0; i < t.data.size(); ++i) {
      const float f = static_cast<float>(t.data[i]);
      char buf[4];
      std::memcpy(buf, &f, 4);
      bytes.append(buf, 4);
    }
  }

  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [id, label] : store.labels) labels[std::to_string(id)] = std::string(to_string(label));
  const nlohmann::json sidecar = {{"count", store.ids.size()},  {"grid_h", store.grid_h},
                                  {"grid_w", store.grid_w},     {"channels", store.channels},
                                  {"offsets", offsets},         {"labels", labels}};
  write_atomic(path, bytes);
  write_atomic(sidecar_path(path), sidecar.dump() + "\n");
}

FeatureStore load_feature_store(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::format, "features", "load_store", path.string() + " is not a feature store");
  }
  FeatureStore store;
  const std::uint32_t count = get_u32(bytes, 4);
  store.grid_h = static_cast<int>(get_u32(bytes, 8));
  store.grid_w = static_cast<int>(get_u32(bytes, 12));
  store.channels = static_cast<int>(get_u32(bytes, 16));
  const std::size_t per = static_cast<std::size_t>(store.grid_h) * store.grid_w * store.channels;
  if (bytes.size() != kHeaderBytes + static_cast<std::size_t>(count) * per * 4) {
    throw Error(ErrorKind::format, "features", "load_store", path.string() + " has the wrong size");
  }

  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_text(sidecar_path(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, "features", "load_store", e.what());
  }
  std::vector<std::pair<std::size_t, ClipId>> by_offset;
  for (const auto& [key, value] : sidecar.at("offsets").items()) {
    by_offset.emplace_back(value.get<std::size_t>(), std::stol(key));
  }
  std::sort(by_offset.begin(), by_offset.end());
  if (by_offset.size() != count) {
    throw Error(ErrorKind::format, "features", "load_store", "sidecar count does not match store");
  }

  for (const auto& [offset, id] : by_offset) {
    if (offset + per * 4 > bytes.size()) {
      throw Error(ErrorKind::format, "features", "load_store", "offset out of range", {id});
    }
    FeatureTensor t{store.grid_h, store.grid_w, store.channels, Eigen::VectorXd(static_cast<Eigen::Index>(per))};
    for (std::size_t i = 0; i < per; ++i) {
      float f;
      std::memcpy(&f, bytes.data() + offset + 4 * i, 4);
      t.data[static_cast<Eigen::Index>(i)] = f;
    }
    store.ids.push_back(id);
    store.tensors.push_back(std::move(t));
  }
  if (sidecar.contains("labels")) {
    for (const auto& [key, value] : sidecar.at("labels").items()) {
      store.labels[std::stol(key)] = label_from_string(value.get<std::string>());
    }
  }
  return store;
}

}  // namespace litho::features
