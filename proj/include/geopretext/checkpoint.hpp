#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geopretext/backbones.hpp"
#include "geopretext/pretext_data.hpp"

namespace geopretext {

inline constexpr char kCheckpointMagic[] = "TSSL1\n";

/// Named-tensor container: architecture identity, learned parameters and
/// batch-norm statistics, input normalization stats, and a free-form JSON
/// provenance header. File layout is the magic string, a little-endian u64
/// header length, the JSON header, then raw float32 tensor payloads in
/// header order. Serialization is canonical, so save -> load -> save is
/// byte-identical.
struct Checkpoint {
  BackboneSpec spec;
  ChannelStats normalization;
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<std::pair<std::string, std::vector<float>>> tensors;

  const std::vector<float>* find(const std::string& name) const;

  /// Snapshot of all backbone + head parameters and statistics.
  static Checkpoint from_network(Network<float>& net, const ChannelStats& stats,
                                 nlohmann::json provenance);

  /// Copies tensors whose names start with `prefix` into matching network
  /// parameters. Every network parameter under the prefix must be present
  /// with the exact size; mismatches raise ConfigError.
  void load_into(Network<float>& net, const std::string& prefix = "") const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Hash of the backbone parameter bytes (values and running stats); the
/// frozen-backbone contract is checked by comparing these before and after.
std::uint64_t backbone_param_hash(Network<float>& net);

}  // namespace geopretext
