#include "glomseg/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace glomseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_le_f32(std::string& out, float v) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float read_le_f32(const unsigned char* p) {
  const std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                             (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp);
  }
  fs::rename(tmp, path);
}

}  // namespace

void save_checkpoint(const std::string& manifest_path,
                     const std::vector<std::pair<std::string, Tensor>>& params, int epoch,
                     std::int64_t iteration, std::uint64_t rng_seed) {
  fs::path mpath(manifest_path);
  if (mpath.extension() != ".json") {
    throw std::invalid_argument("checkpoint manifest path must end in .json: " + manifest_path);
  }
  fs::path bpath = mpath;
  bpath.replace_extension(".bin");

  std::string blob;
  json manifest;
  manifest["epoch"] = epoch;
  manifest["iteration"] = iteration;
  manifest["rng_seed"] = rng_seed;
  manifest["data_file"] = bpath.filename().string();
  manifest["params"] = json::array();
  for (const auto& [name, t] : params) {
    const std::size_t offset = blob.size();
    for (float v : t.values()) append_le_f32(blob, v);
    json entry;
    entry["name"] = name;
    entry["shape"] = {t.shape().n, t.shape().c, t.shape().h, t.shape().w};
    entry["byte_offset"] = offset;
    entry["byte_length"] = blob.size() - offset;
    manifest["params"].push_back(entry);
  }

  write_file_atomic(bpath.string(), blob);
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& manifest_path) {
  std::ifstream min(manifest_path);
  if (!min) throw std::runtime_error("cannot read checkpoint manifest: " + manifest_path);
  json manifest = json::parse(min);

  fs::path bpath = fs::path(manifest_path).parent_path() /
                   manifest.at("data_file").get<std::string>();
  std::ifstream bin(bpath, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read checkpoint data: " + bpath.string());
  std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  ckpt.epoch = manifest.at("epoch").get<int>();
  ckpt.iteration = manifest.at("iteration").get<std::int64_t>();
  ckpt.rng_seed = manifest.at("rng_seed").get<std::uint64_t>();
  for (const json& entry : manifest.at("params")) {
    const auto& sh = entry.at("shape");
    Shape shape{sh.at(0).get<int>(), sh.at(1).get<int>(), sh.at(2).get<int>(), sh.at(3).get<int>()};
    const std::size_t offset = entry.at("byte_offset").get<std::size_t>();
    const std::size_t length = entry.at("byte_length").get<std::size_t>();
    if (offset + length > blob.size() ||
        length != static_cast<std::size_t>(shape.numel()) * 4) {
      throw std::runtime_error("checkpoint entry '" + entry.at("name").get<std::string>() +
                               "' is inconsistent with the data file");
    }
    std::vector<float> values(static_cast<std::size_t>(shape.numel()));
    const unsigned char* p = reinterpret_cast<const unsigned char*>(blob.data()) + offset;
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = read_le_f32(p + 4 * i);
    ckpt.params.emplace_back(entry.at("name").get<std::string>(),
                             Tensor::from_vector(shape, std::move(values)));
  }
  return ckpt;
}

void load_params_into(const Checkpoint& ckpt,
                      const std::vector<std::pair<std::string, Tensor>>& dst) {
  for (const auto& [name, tensor] : dst) {
    const auto it =
        std::find_if(ckpt.params.begin(), ckpt.params.end(),
                     [&name = name](const auto& kv) { return kv.first == name; });
    if (it == ckpt.params.end()) {
      throw std::runtime_error("checkpoint is missing parameter '" + name + "'");
    }
    if (!(it->second.shape() == tensor.shape())) {
      throw std::runtime_error("checkpoint parameter '" + name + "' has shape " +
                               it->second.shape().str() + ", expected " + tensor.shape().str());
    }
    Tensor t = tensor;  // shared handle
    std::copy(it->second.values().begin(), it->second.values().end(), t.values().begin());
  }
}

std::string checkpoint_manifest_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_epoch_%03d.json", epoch);
  return buf;
}

int epoch_from_checkpoint_name(const std::string& manifest_path) {
  const std::string stem = fs::path(manifest_path).stem().string();
  const std::string prefix = "ckpt_epoch_";
  if (stem.rfind(prefix, 0) != 0) {
    throw std::invalid_argument("not a checkpoint manifest name: " + manifest_path);
  }
  return std::stoi(stem.substr(prefix.size()));
}

}  // namespace glomseg
