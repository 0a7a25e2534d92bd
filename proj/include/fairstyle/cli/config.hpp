#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairstyle/core/tensor.hpp"
#include "fairstyle/debias/optimizer.hpp"
#include "fairstyle/discovery/discovery.hpp"
#include "fairstyle/textclip/textclip.hpp"

namespace fairstyle::cli {

/// Exactly one of a synthetic spec or a real checkpoint.
struct GeneratorSource {
  std::optional<std::filesystem::path> synthetic_spec;
  std::optional<nlohmann::json> synthetic_inline;
  std::optional<std::filesystem::path> checkpoint;
  std::string adapter;  // with checkpoint
  std::filesystem::path base_dir;  // relative paths resolve here, then under FAIRSTYLE_CACHE
};

/// An attribute labeled either by a classifier ("synthetic" or a checkpoint
/// path) or by a prompt pair.
struct AttributeConfig {
  std::string name;
  std::optional<std::string> classifier;
  std::optional<textclip::PromptPair> prompts;
  std::optional<ChannelId> channel;  // skips discovery
  SparseBias direction;              // text-direction debiasing when non-empty
  std::string field;                 // config path used in error messages
};

struct AuditConfig {
  std::size_t n = 10000;
  std::vector<std::vector<std::string>> joints;  // defaults to all attributes when empty and M >= 2
};

struct PipelineConfig {
  GeneratorSource generator;
  std::vector<AttributeConfig> attributes;
  discovery::DiscoveryConfig discovery;
  debias::OptimizerConfig optimizer;
  AuditConfig audit;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Validates a pipeline config document. Errors are ConfigError with the
/// offending field path, e.g. "attributes[1].classifier".
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

std::string config_hash(const nlohmann::json& j);

/// Seed of a named stage under the global seed. Stage names used by the
/// commands: "discover/<attribute>", "debias", "audit-before",
/// "audit-after", "audit", "sample".
std::uint64_t stage_seed(std::uint64_t global_seed, std::string_view stage);

/// "(2,5)" or "2,5".
ChannelId parse_channel(std::string_view text);
/// "(2,5);(5,11)".
std::vector<ChannelId> parse_channel_list(std::string_view text);
/// "(2,5):1.0;(3,1):-0.5".
SparseBias parse_direction(std::string_view text);
/// "a,b,c" with surrounding spaces trimmed.
std::vector<std::string> split_names(std::string_view text);

/// First existing candidate among path, base_dir/path and
/// $FAIRSTYLE_CACHE/path.
std::optional<std::filesystem::path> resolve_asset(const std::filesystem::path& path,
                                                   const std::filesystem::path& base_dir);

}  // namespace fairstyle::cli
