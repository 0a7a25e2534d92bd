#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "fairstyle/core/adapters.hpp"

namespace fairstyle::discovery {

/// Channels that are never searched: tRGB styles and the conv styles of the
/// last `exclude_last_blocks` synthesis blocks.
struct ExclusionRules {
  bool exclude_trgb = true;
  int exclude_last_blocks = 4;
};

struct DiscoveryConfig {
  std::size_t batch_size = 128;
  double perturbation = 10.0;
  ExclusionRules exclusions;
  std::uint64_t seed = 0;

  /// Throws ConfigError on N == 0, c == 0 or K < 0.
  void validate() const;
};

struct ChannelScore {
  ChannelId channel;
  double score = 0.0;  // mean |C(G(s - c e)) - C(G(s + c e))| over the batch

  friend bool operator==(const ChannelScore&, const ChannelScore&) = default;
};

struct DiscoveryResult {
  ChannelId best;
  std::vector<ChannelScore> ranking;  // best first
};

bool is_excluded(const StyleLayout& layout, const ChannelId& id, const ExclusionRules& rules);
std::vector<ChannelId> candidate_channels(const StyleLayout& layout, const ExclusionRules& rules);

/// Mean absolute change of the classifier score when channel `id` is moved
/// by -c and +c, all other channels left as they are. Excluded channels and
/// an empty batch raise ConfigError.
ChannelScore score_channel(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                           std::span<const StyleCode> codes, const ChannelId& id, double c,
                           const ExclusionRules& rules = {});

/// Scores every candidate over the same codes. Candidates are evaluated in
/// parallel when both adapters allow it; the output is identical to the
/// serial sweep.
std::vector<ChannelScore> sweep(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                                std::span<const StyleCode> codes, std::span<const ChannelId> candidates, double c,
                                const ExclusionRules& rules = {});

/// Sorts by descending score, ties by (layer, channel).
void rank(std::vector<ChannelScore>& scores);

/// Samples config.batch_size codes from config.seed, scores every candidate
/// channel on that one batch and returns the ranking.
DiscoveryResult find_controlling_channel(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                                         const DiscoveryConfig& config);

nlohmann::json to_json(const DiscoveryResult& result);

namespace reference {

std::vector<ChannelScore> sweep(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                                std::span<const StyleCode> codes, std::span<const ChannelId> candidates, double c,
                                const ExclusionRules& rules = {});

}  // namespace reference

}  // namespace fairstyle::discovery
