#include "fairstyle/discovery/discovery.hpp"

#include <algorithm>
#include <cmath>

#include "fairstyle/core/batch.hpp"
#include "fairstyle/core/error.hpp"
#include "fairstyle/core/parallel.hpp"
#include "fairstyle/core/tensor_io.hpp"

namespace fairstyle::discovery {

void DiscoveryConfig::validate() const {
  if (batch_size == 0) throw ConfigError("discovery batch size must be at least 1", "batch_size");
  if (perturbation == 0.0 || !std::isfinite(perturbation)) throw ConfigError("perturbation must be non-zero", "perturbation");
  if (exclusions.exclude_last_blocks < 0) throw ConfigError("exclude_last_blocks must be >= 0", "exclude_last_blocks");
}

bool is_excluded(const StyleLayout& layout, const ChannelId& id, const ExclusionRules& rules) {
  layout.check(id);
  const auto& info = layout.layer(id.layer);
  if (rules.exclude_trgb && info.kind == LayerKind::trgb) return true;
  return info.block > layout.last_block() - rules.exclude_last_blocks;
}

std::vector<ChannelId> candidate_channels(const StyleLayout& layout, const ExclusionRules& rules) {
  std::vector<ChannelId> out;
  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    for (std::size_t c = 0; c < layout.layer(l).width; ++c) {
      if (!is_excluded(layout, {l, c}, rules)) out.push_back({l, c});
    }
  }
  return out;
}

ChannelScore score_channel(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                           std::span<const StyleCode> codes, const ChannelId& id, double c,
                           const ExclusionRules& rules) {
  if (codes.empty()) throw ConfigError("cannot score a channel on an empty batch");
  if (is_excluded(*generator.layout(), id, rules)) {
    throw ConfigError("channel " + to_string(id) + " is excluded from the search");
  }
  double total = 0.0;
  for (const auto& code : codes) {
    StyleCode moved = code;
    const double base = code.at(id);
    moved.at(id) = base - c;
    const double minus = classifier.score(generator.render(moved));
    moved.at(id) = base + c;
    const double plus = classifier.score(generator.render(moved));
    total += std::abs(minus - plus);
  }
  return {id, total / static_cast<double>(codes.size())};
}

std::vector<ChannelScore> sweep(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                                std::span<const StyleCode> codes, std::span<const ChannelId> candidates, double c,
                                const ExclusionRules& rules) {
  std::vector<ChannelScore> out(candidates.size());
  const bool parallel = generator.concurrent_safe() && classifier.concurrent_safe();
  detail::parallel_for(candidates.size(), parallel, [&](std::size_t i) {
    out[i] = score_channel(generator, classifier, codes, candidates[i], c, rules);
  });
  return out;
}

void rank(std::vector<ChannelScore>& scores) {
  std::sort(scores.begin(), scores.end(), [](const ChannelScore& a, const ChannelScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.channel < b.channel;
  });
}

DiscoveryResult find_controlling_channel(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                                         const DiscoveryConfig& config) {
  config.validate();
  const auto candidates = candidate_channels(*generator.layout(), config.exclusions);
  if (candidates.empty()) throw ConfigError("every style channel is excluded from the search");
  const auto codes = sample_codes(generator, config.batch_size, config.seed);
  DiscoveryResult result;
  result.ranking = sweep(generator, classifier, codes, candidates, config.perturbation, config.exclusions);
  rank(result.ranking);
  result.best = result.ranking.front().channel;
  return result;
}

nlohmann::json to_json(const DiscoveryResult& result) {
  nlohmann::json ranking = nlohmann::json::array();
  for (const auto& s : result.ranking) {
    ranking.push_back({{"layer", s.channel.layer}, {"channel", s.channel.channel}, {"score", s.score}});
  }
  return {{"best", fairstyle::to_json(result.best)}, {"ranking", ranking}};
}

namespace reference {

std::vector<ChannelScore> sweep(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                                std::span<const StyleCode> codes, std::span<const ChannelId> candidates, double c,
                                const ExclusionRules& rules) {
  std::vector<ChannelScore> out;
  out.reserve(candidates.size());
  for (const auto& id : candidates) out.push_back(score_channel(generator, classifier, codes, id, c, rules));
  return out;
}

}  // namespace reference

}  // namespace fairstyle::discovery
