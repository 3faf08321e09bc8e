#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lru/data/pipeline.hpp"
#include "lru/network.hpp"
#include "lru/optim.hpp"

namespace lru::harness {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    Network network;
    AdamState optimizer;
    data::FittedPipeline pipeline;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string command;  // subcommand that produced the checkpoint
};

/// Canonical text form: sorted keys, shortest round-trip decimals, no
/// wall-clock data, so equal checkpoints serialize to identical bytes.
std::string serialize_checkpoint(const Checkpoint& checkpoint);

/// Throws ParseError (with byte offset when the JSON itself is malformed) or
/// a Version error for an unsupported format version.
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical dump of `value`.
std::string config_hash(const nlohmann::json& value);

nlohmann::json pipeline_to_json(const data::FittedPipeline& pipeline);
data::FittedPipeline pipeline_from_json(const nlohmann::json& j);

}  // namespace lru::harness
