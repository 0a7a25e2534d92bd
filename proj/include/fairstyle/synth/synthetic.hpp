#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairstyle/core/adapters.hpp"
#include "fairstyle/core/batch.hpp"

namespace fairstyle::synth {

struct Term {
  ChannelId channel;
  double weight = 0.0;
};

/// Attribute `b` reads `weight` times attribute `source`'s causal channel,
/// which shifts its decision threshold with the source attribute.
struct Coupling {
  std::string source;
  double weight = 0.0;
};

struct PromptText {
  std::string positive;
  std::string negative;
};

/// One planted attribute. The classifier computes the readout
///   v = causal_weight * s[causal] + sum(spurious) + sum(couplings)
/// from the rendered image and scores it with a logistic of the given slope
/// around a threshold chosen so that P(label = 1) == base_rate.
struct PlantedAttribute {
  std::string name;
  ChannelId causal;
  double causal_weight = 1.0;
  std::vector<Term> spurious;
  std::vector<Coupling> couplings;
  double slope = 4.0;
  double base_rate = 0.5;
  std::optional<PromptText> prompts;
};

/// Per-channel Gaussian law override.
struct ChannelLaw {
  ChannelId channel;
  double mean = 0.0;
  double std = 1.0;
};

struct SyntheticSpec {
  std::vector<LayerInfo> layers;
  std::size_t image_width = 8;
  std::size_t image_height = 8;
  double default_mean = 0.0;
  double default_std = 1.0;
  std::vector<ChannelLaw> channel_laws;
  std::vector<PlantedAttribute> attributes;
  int excluded_last_blocks = 4;
};

/// Throws ConfigError describing the first problem found.
void validate(const SyntheticSpec& spec);

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const nlohmann::json& j);

/// Readout of one attribute resolved to channels.
struct Readout {
  std::vector<Term> terms;  // causal term first
  double slope = 0.0;
  double threshold = 0.0;
};

/// Samples every channel independently from its Gaussian law and renders an
/// image whose leading pixels hold the probed channel values. The remaining
/// pixels are a tanh texture over all channels, so every edit shows up in
/// the image.
class SyntheticGenerator final : public GeneratorAdapter {
 public:
  SyntheticGenerator(std::shared_ptr<const StyleLayout> layout, std::vector<double> means, std::vector<double> stds,
                     std::vector<ChannelId> probes, std::size_t width, std::size_t height);

  std::shared_ptr<const StyleLayout> layout() const override { return layout_; }
  StyleCode sample_style(std::uint64_t latent_seed) const override;
  Image render(const StyleCode& code) const override;
  bool concurrent_safe() const override { return true; }

  /// Pixel holding the given probed channel.
  std::size_t pixel_of(const ChannelId& id) const;

 private:
  std::shared_ptr<const StyleLayout> layout_;
  std::vector<double> means_;
  std::vector<double> stds_;
  std::vector<ChannelId> probes_;
  std::vector<std::size_t> probe_flat_;
  std::size_t width_;
  std::size_t height_;
};

/// Logistic classifier over pixel readouts.
class SyntheticClassifier final : public ClassifierAdapter {
 public:
  SyntheticClassifier(std::string attribute, std::vector<std::pair<std::size_t, double>> pixel_weights,
                      double slope, double threshold, std::size_t pixel_count);

  double score(const Image& image) const override;
  bool concurrent_safe() const override { return true; }

  /// Linear readout before the logistic.
  double readout(const Image& image) const;

 private:
  std::vector<std::pair<std::size_t, double>> pixel_weights_;
  double slope_;
  double readout_threshold_;
  std::size_t pixel_count_;
};

/// Closed-form answers for a synthetic spec.
class Oracle {
 public:
  explicit Oracle(const SyntheticSpec& spec);

  std::size_t attribute_index(std::string_view name) const;
  const Readout& readout(std::size_t attribute) const { return readouts_.at(attribute); }

  double channel_mean(const ChannelId& id) const;
  double channel_std(const ChannelId& id) const;

  double base_rate(std::size_t attribute) const;
  double readout_mean(std::size_t attribute) const;
  double readout_std(std::size_t attribute) const;
  double threshold(std::size_t attribute) const { return readouts_.at(attribute).threshold; }

  /// Scalar bias on the causal channel that makes P(label = 1) exactly 1/2.
  double balancing_offset(std::size_t attribute) const;
  /// P(label = 1) with `offset` added to the causal channel.
  double label_rate_with_offset(std::size_t attribute, double offset) const;

  /// Joint label probabilities of two attributes on unedited samples, ordered
  /// 00, 01, 10, 11 with the first attribute as the high bit.
  std::array<double, 4> joint_cells(std::size_t a, std::size_t b) const;

  /// Affine coupling over [causal(a), causal(b)] that makes both labels fair
  /// and independent, given the channel statistics the tensor will use.
  /// Requires that `a` does not read b's causal channel.
  CoupledBias decorrelating_tensor(std::size_t a, std::size_t b, const ChannelStats& stats_a,
                                   const ChannelStats& stats_b) const;

 private:
  double cross_covariance(std::size_t a, std::size_t b) const;

  SyntheticSpec spec_;
  std::shared_ptr<const StyleLayout> layout_;
  std::vector<double> means_;
  std::vector<double> stds_;
  std::vector<Readout> readouts_;
};

struct SyntheticModel {
  SyntheticSpec spec;
  std::shared_ptr<const SyntheticGenerator> generator;
  std::vector<std::shared_ptr<const SyntheticClassifier>> classifiers;
  std::shared_ptr<const Oracle> oracle;

  const ClassifierAdapter& classifier(std::string_view name) const;
  std::vector<const ClassifierAdapter*> classifier_set() const;
  std::vector<const ClassifierAdapter*> classifier_set(const std::vector<std::string>& names) const;
};

SyntheticModel make_synthetic(const SyntheticSpec& spec);

/// StyleGAN2-shaped layout: block 0 has one conv and one tRGB layer, every
/// later block has two conv layers and one tRGB layer.
std::vector<LayerInfo> stylegan_like_layout(int blocks, std::size_t width);

/// One attribute planted at channel (2,5) with the given base rate, plus two
/// weak spurious channels.
SyntheticSpec biased_single_spec(double base_rate, int blocks = 7, std::size_t width = 32);

/// Two attributes whose unedited joint label distribution equals `cells`
/// (00, 01, 10, 11), using a coupling of the second attribute on the first.
SyntheticSpec correlated_pair_spec(const std::array<double, 4>& cells, int blocks = 7, std::size_t width = 32);

/// Two independent attributes with the given base rates.
SyntheticSpec independent_pair_spec(double base_a, double base_b, int blocks = 7, std::size_t width = 32);

/// Random layout (7 to 9 blocks, width >= 64) with one planted attribute and
/// up to eight spurious channels whose weights are at most a third of the
/// causal weight.
SyntheticSpec random_discovery_spec(std::uint64_t seed, std::size_t width = 64);

}  // namespace fairstyle::synth
