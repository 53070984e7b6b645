#pragma once

// ============================================================================
// Checkpoint format: magic "RHXCKPT1", a length-prefixed JSON header (model
// config, parameter shapes, optional metadata), then raw float32 parameter
// data in registration order. Load reconstructs the network from the header
// config and fails loudly on any shape mismatch.
// ============================================================================

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhexis/model/network.hpp"

namespace rhexis::model {

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
  return nlohmann::json{
      {"frames", cfg.frames},
      {"stride", cfg.stride},
      {"frame_size", cfg.frame_size},
      {"spatial_widths", cfg.spatial_widths},
      {"temporal", temporal_name(cfg.temporal)},
      {"temporal_dim", cfg.temporal_dim},
      {"lstm_layers", cfg.lstm_layers},
      {"conv_layers", cfg.conv_layers},
      {"attn_layers", cfg.attn_layers},
      {"attn_heads", cfg.attn_heads},
      {"horizon_dim", cfg.horizon_dim},
      {"head_hidden", cfg.head_hidden},
      {"lambda_current", cfg.lambda_current},
      {"per_frame_current", cfg.per_frame_current},
  };
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.frames = j.at("frames").get<int>();
  cfg.stride = j.at("stride").get<int>();
  cfg.frame_size = j.at("frame_size").get<int>();
  cfg.spatial_widths = j.at("spatial_widths").get<std::vector<int>>();
  cfg.temporal = temporal_from_name(j.at("temporal").get<std::string>());
  cfg.temporal_dim = j.at("temporal_dim").get<int>();
  cfg.lstm_layers = j.at("lstm_layers").get<int>();
  cfg.conv_layers = j.at("conv_layers").get<int>();
  cfg.attn_layers = j.at("attn_layers").get<int>();
  cfg.attn_heads = j.at("attn_heads").get<int>();
  cfg.horizon_dim = j.at("horizon_dim").get<int>();
  cfg.head_hidden = j.at("head_hidden").get<int>();
  cfg.lambda_current = j.at("lambda_current").get<double>();
  cfg.per_frame_current = j.at("per_frame_current").get<bool>();
  cfg.validate();
  return cfg;
}

inline constexpr char kCheckpointMagic[8] = {'R', 'H', 'X', 'C',
                                            'K', 'P', 'T', '1'};

inline void save_checkpoint(const std::filesystem::path& path,
                            AnticipationNet<float>& net,
                            const nlohmann::json& meta = {}) {
  std::vector<nn::Param<float>*> params;
  net.params(params);

  nlohmann::json header;
  header["config"] = config_to_json(net.config());
  header["meta"] = meta;
  header["shapes"] = nlohmann::json::array();
  for (const auto* p : params)
    header["shapes"].push_back({p->value.rows(), p->value.cols()});
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint64_t len = header_str.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_str.data(), static_cast<std::streamsize>(len));
  for (const auto* p : params)
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  if (!out) throw DataError("short write to " + path.string());
}

// Reads the header only (config + metadata).
inline nlohmann::json read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw DataError("not a checkpoint file: " + path.string());
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated checkpoint header: " + path.string());
  return nlohmann::json::parse(header_str);
}

inline AnticipationNet<float> load_checkpoint(
    const std::filesystem::path& path, nlohmann::json* meta_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw DataError("not a checkpoint file: " + path.string());
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated checkpoint header: " + path.string());
  const nlohmann::json header = nlohmann::json::parse(header_str);
  if (meta_out) *meta_out = header.value("meta", nlohmann::json());

  AnticipationNet<float> net(config_from_json(header.at("config")), /*seed=*/0);
  std::vector<nn::Param<float>*> params;
  net.params(params);
  const auto& shapes = header.at("shapes");
  if (shapes.size() != params.size())
    throw DataError("checkpoint parameter count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    const long rows = shapes[i][0].get<long>();
    const long cols = shapes[i][1].get<long>();
    if (rows != params[i]->value.rows() || cols != params[i]->value.cols())
      throw DataError("checkpoint shape mismatch at parameter " +
                      std::to_string(i));
    in.read(reinterpret_cast<char*>(params[i]->value.data()),
            static_cast<std::streamsize>(rows * cols * sizeof(float)));
  }
  if (!in) throw DataError("truncated checkpoint data: " + path.string());
  return net;
}

}  // namespace rhexis::model
