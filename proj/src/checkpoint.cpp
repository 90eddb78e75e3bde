#include "tsr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

namespace tsr {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

using nlohmann::json;

constexpr char kMagic[4] = {'T', 'S', 'R', 'C'};
constexpr uint32_t kVersion = 1;

struct BlobRecord {
  std::string name;
  std::string kind;  // param / stat / m1 / m2
  std::vector<int> shape;
  int64_t count = 0;
};

json config_to_json(const ModelConfig& cfg) {
  return json{{"variant", to_string(cfg.variant)},
              {"input_size", cfg.input_size},
              {"channels", cfg.channels},
              {"embed_blocks", cfg.embed_blocks},
              {"attention_hidden", cfg.attention_hidden},
              {"classifier_hidden", cfg.classifier_hidden},
              {"seed", cfg.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.variant = variant_from_string(j.at("variant").get<std::string>());
  cfg.input_size = j.at("input_size").get<int>();
  cfg.channels = j.at("channels").get<int>();
  cfg.embed_blocks = j.at("embed_blocks").get<int>();
  cfg.attention_hidden = j.at("attention_hidden").get<int>();
  cfg.classifier_hidden = j.at("classifier_hidden").get<int>();
  cfg.seed = j.at("seed").get<uint64_t>();
  return cfg;
}

template <typename T>
void append_raw(std::vector<char>& out, const T& value) {
  const char* p = reinterpret_cast<const char*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

void append_floats(std::vector<char>& out, const float* data, int64_t count) {
  const char* p = reinterpret_cast<const char*>(data);
  out.insert(out.end(), p, p + static_cast<size_t>(count) * sizeof(float));
}

struct CheckpointData {
  ModelConfig config;
  bool stats_initialized = false;
  bool has_optimizer = false;
  int64_t step_count = 0;
  std::vector<BlobRecord> records;
  std::map<std::string, std::vector<float>> blobs;  // key: kind + ":" + name
};

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 20) throw CheckpointError("checkpoint file is too short");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

  uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  const uint32_t actual_crc = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
            static_cast<uInt>(bytes.size() - 4)));
  if (stored_crc != actual_crc) throw CheckpointError("checkpoint is corrupted (crc mismatch)");

  uint64_t manifest_len = 0;
  std::memcpy(&manifest_len, bytes.data() + 8, 8);
  if (16 + manifest_len + 4 > bytes.size())
    throw CheckpointError("checkpoint manifest length is inconsistent");
  json manifest;
  try {
    manifest = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<int64_t>(manifest_len));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint manifest is not valid json: ") + e.what());
  }

  CheckpointData data;
  data.config = config_from_json(manifest.at("model"));
  data.stats_initialized = manifest.value("stats_initialized", false);
  if (manifest.contains("optimizer")) {
    data.has_optimizer = true;
    data.step_count = manifest["optimizer"].at("step_count").get<int64_t>();
  }

  size_t offset = 16 + manifest_len;
  for (const json& jr : manifest.at("blobs")) {
    BlobRecord rec;
    rec.name = jr.at("name").get<std::string>();
    rec.kind = jr.at("kind").get<std::string>();
    rec.count = jr.at("count").get<int64_t>();
    if (jr.contains("shape")) rec.shape = jr["shape"].get<std::vector<int>>();
    const size_t nbytes = static_cast<size_t>(rec.count) * sizeof(float);
    if (offset + nbytes + 4 > bytes.size())
      throw CheckpointError("checkpoint payload is truncated at blob " + rec.name);
    std::vector<float> values(static_cast<size_t>(rec.count));
    std::memcpy(values.data(), bytes.data() + offset, nbytes);
    offset += nbytes;
    data.blobs.emplace(rec.kind + ":" + rec.name, std::move(values));
    data.records.push_back(std::move(rec));
  }
  if (offset + 4 != bytes.size())
    throw CheckpointError("checkpoint has trailing bytes after the payload");
  return data;
}

void check_config_match(const ModelConfig& stored, const ModelConfig& model) {
  if (stored.variant != model.variant)
    throw CheckpointError(std::string("checkpoint variant ") + to_string(stored.variant) +
                          " does not match model variant " + to_string(model.variant));
  if (stored.input_size != model.input_size || stored.channels != model.channels ||
      stored.embed_blocks != model.embed_blocks ||
      stored.attention_hidden != model.attention_hidden ||
      stored.classifier_hidden != model.classifier_hidden)
    throw CheckpointError("checkpoint model dimensions do not match the target model");
}

}  // namespace

void save_checkpoint(const std::string& path, CattNet<float>& model,
                     const AdamW<float>* optimizer) {
  json manifest;
  manifest["model"] = config_to_json(model.config());
  manifest["stats_initialized"] = model.stats_initialized();
  if (optimizer) manifest["optimizer"] = json{{"step_count", optimizer->step_count}};

  json blob_list = json::array();
  std::vector<std::pair<const float*, int64_t>> payload;
  auto add = [&blob_list, &payload](const std::string& name, const std::string& kind,
                                    const std::vector<int>* shape, const float* data,
                                    int64_t count) {
    json rec{{"name", name}, {"kind", kind}, {"count", count}};
    if (shape) rec["shape"] = *shape;
    blob_list.push_back(std::move(rec));
    payload.emplace_back(data, count);
  };

  // Moments may be unsized when no optimizer step has run yet; persist zeros
  // of the right size so loading always finds matching buffers.
  std::vector<std::vector<float>> zero_backing;
  for (Param<float>* p : model.params()) {
    add(p->name, "param", &p->tensor.shape(), p->tensor.data(), p->tensor.numel());
    if (!optimizer) continue;
    for (const char* kind : {"m1", "m2"}) {
      std::vector<float>& moments = kind[1] == '1' ? p->m : p->v;
      if (static_cast<int64_t>(moments.size()) != p->tensor.numel()) {
        zero_backing.emplace_back(static_cast<size_t>(p->tensor.numel()), 0.0f);
        add(p->name, kind, nullptr, zero_backing.back().data(), p->tensor.numel());
      } else {
        add(p->name, kind, nullptr, moments.data(), p->tensor.numel());
      }
    }
  }
  for (const auto& stat : model.stats())
    add(stat.name, "stat", nullptr, stat.values->data(), static_cast<int64_t>(stat.values->size()));
  manifest["blobs"] = std::move(blob_list);

  const std::string manifest_text = manifest.dump();
  std::vector<char> bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  append_raw(bytes, kVersion);
  append_raw(bytes, static_cast<uint64_t>(manifest_text.size()));
  bytes.insert(bytes.end(), manifest_text.begin(), manifest_text.end());
  for (const auto& [data, count] : payload) append_floats(bytes, data, count);
  const uint32_t crc = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
  append_raw(bytes, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("short write to checkpoint: " + path);
}

void load_checkpoint_into(const std::string& path, CattNet<float>& model,
                          AdamW<float>* optimizer) {
  CheckpointData data = read_checkpoint(path);
  check_config_match(data.config, model.config());
  if (optimizer && !data.has_optimizer)
    throw CheckpointError("checkpoint carries no optimizer state");

  for (Param<float>* p : model.params()) {
    auto it = data.blobs.find("param:" + p->name);
    if (it == data.blobs.end()) throw CheckpointError("checkpoint is missing weights: " + p->name);
    if (static_cast<int64_t>(it->second.size()) != p->tensor.numel())
      throw CheckpointError("checkpoint weight size mismatch for " + p->name);
    p->tensor.value_vec() = it->second;
    if (optimizer) {
      p->m = data.blobs.at("m1:" + p->name);
      p->v = data.blobs.at("m2:" + p->name);
    }
  }
  for (const auto& stat : model.stats()) {
    auto it = data.blobs.find("stat:" + stat.name);
    if (it == data.blobs.end())
      throw CheckpointError("checkpoint is missing statistics: " + stat.name);
    if (it->second.size() != stat.values->size())
      throw CheckpointError("checkpoint statistic size mismatch for " + stat.name);
    *stat.values = it->second;
  }
  if (data.stats_initialized) model.mark_stats_initialized();
  if (optimizer) optimizer->step_count = data.step_count;
}

CattNet<float> load_checkpoint(const std::string& path, AdamW<float>* optimizer) {
  CattNet<float> model(peek_checkpoint_config(path));
  load_checkpoint_into(path, model, optimizer);
  return model;
}

ModelConfig peek_checkpoint_config(const std::string& path) {
  return read_checkpoint(path).config;
}

}  // namespace tsr
