#include "geopretext/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "geopretext/errors.hpp"
#include "geopretext/rng.hpp"

namespace geopretext {

namespace {

nlohmann::json header_json(const Checkpoint& ckpt) {
  nlohmann::json h;
  h["arch"] = to_string(ckpt.spec.arch);
  h["num_blocks"] = ckpt.spec.num_blocks;
  h["input_shape"] = {32, 32, 3};
  h["normalization"] = {{"mean", ckpt.normalization.mean},
                        {"std", ckpt.normalization.stddev}};
  h["provenance"] = ckpt.provenance;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, data] : ckpt.tensors) {
    tensors.push_back({{"name", name}, {"size", data.size()}});
  }
  h["tensors"] = tensors;
  return h;
}

}  // namespace

const std::vector<float>* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, data] : tensors) {
    if (n == name) return &data;
  }
  return nullptr;
}

Checkpoint Checkpoint::from_network(Network<float>& net, const ChannelStats& stats,
                                    nlohmann::json provenance) {
  Checkpoint ckpt;
  ckpt.spec = net.spec;
  ckpt.normalization = stats;
  ckpt.provenance = std::move(provenance);
  for (const auto& p : net.collect_all()) {
    ckpt.tensors.emplace_back(p.name, *p.value);
  }
  return ckpt;
}

void Checkpoint::load_into(Network<float>& net, const std::string& prefix) const {
  auto params = net.collect_all();
  for (auto& p : params) {
    if (!prefix.empty() && p.name.rfind(prefix, 0) != 0) continue;
    const std::vector<float>* src = find(p.name);
    if (!src) {
      throw ConfigError("checkpoint: missing tensor '" + p.name + "' for " +
                        net.spec.describe());
    }
    if (src->size() != p.value->size()) {
      throw ConfigError("checkpoint: tensor '" + p.name + "' holds " +
                        std::to_string(src->size()) + " values, model expects " +
                        std::to_string(p.value->size()));
    }
    *p.value = *src;
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto tmp = path.string() + ".tmp";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TrainAbort("checkpoint: cannot open " + tmp);
    const std::string header = header_json(ckpt).dump();
    out.write(kCheckpointMagic, 6);
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& [name, data] : ckpt.tensors) {
      out.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(float)));
    }
    out.flush();
    if (!out) throw TrainAbort("checkpoint: short write to " + tmp);
    out.close();
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);  // never leave partial files behind
    throw;
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("checkpoint: cannot open " + path.string());
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kCheckpointMagic, 6) != 0) {
    throw FormatError("checkpoint: bad magic in " + path.string());
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw FormatError("checkpoint: truncated header in " + path.string());

  nlohmann::json h = nlohmann::json::parse(header, nullptr, false);
  if (h.is_discarded()) throw FormatError("checkpoint: invalid header JSON in " + path.string());

  Checkpoint ckpt;
  ckpt.spec.arch = arch_from_string(h.at("arch").get<std::string>());
  ckpt.spec.num_blocks = h.at("num_blocks").get<int>();
  const auto& norm = h.at("normalization");
  for (std::size_t i = 0; i < 3; ++i) {
    ckpt.normalization.mean[i] = norm.at("mean").at(i).get<double>();
    ckpt.normalization.stddev[i] = norm.at("std").at(i).get<double>();
  }
  ckpt.provenance = h.value("provenance", nlohmann::json::object());
  for (const auto& t : h.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    const auto size = t.at("size").get<std::size_t>();
    std::vector<float> data(size);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(size * sizeof(float)));
    if (!in) throw FormatError("checkpoint: truncated tensor '" + name + "' in " + path.string());
    ckpt.tensors.emplace_back(name, std::move(data));
  }
  return ckpt;
}

std::uint64_t backbone_param_hash(Network<float>& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : net.collect_backbone()) {
    h = fnv1a_bytes(p.value->data(), p.value->size() * sizeof(float), h);
  }
  return h;
}

}  // namespace geopretext
