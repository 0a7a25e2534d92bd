#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairstyle/core/batch.hpp"

namespace fairstyle::audit {

/// Empirical distribution over the 2^M label combinations of M attributes.
/// Cell index bit (M-1-i) holds attribute i, so cells are ordered
/// lexicographically by label string ("00", "01", "10", "11").
struct AttributeDistribution {
  std::vector<std::string> attributes;
  std::vector<std::size_t> counts;
  std::vector<double> probabilities;
  std::size_t sample_count = 0;

  std::size_t cell_count() const { return counts.size(); }
  /// Labels of one cell, first attribute first, e.g. "01".
  std::string cell_label(std::size_t cell) const;

  friend bool operator==(const AttributeDistribution&, const AttributeDistribution&) = default;
};

/// Builds a distribution from raw cell counts (2^M of them).
AttributeDistribution from_counts(std::vector<std::string> attributes, std::vector<std::size_t> counts);

/// Scores and thresholds every image; failures name the attribute and image.
LabelMatrix label_batch(ClassifierSet classifiers, std::span<const Image> images);

/// Distribution of the named attributes' label combinations. Unknown or
/// repeated names, an empty subset or an empty label matrix raise ConfigError.
AttributeDistribution empirical_distribution(const LabelMatrix& labels, const std::vector<std::string>& subset);

/// Sums the joint counts down to `subset` (names must appear in the joint).
AttributeDistribution marginalize(const AttributeDistribution& joint, const std::vector<std::string>& subset);

/// Cell probabilities accumulated from classifier scores instead of labels:
/// each sample contributes prod_i (bit_i ? p_i : 1 - p_i) to every cell.
std::vector<double> soft_cells(const ScoreMatrix& scores);

/// KL(p || uniform) in nats with the 0 ln 0 = 0 convention. The cell count
/// must be a power of two.
double kl_to_uniform(std::span<const double> probabilities);
double kl_to_uniform(const AttributeDistribution& dist);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion (95% by default).
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct DistributionReport {
  AttributeDistribution distribution;
  double kl = 0.0;
  std::vector<Interval> intervals;  // per cell
};

DistributionReport summarize(AttributeDistribution dist);

struct AuditReport {
  std::vector<DistributionReport> marginals;
  std::vector<DistributionReport> joints;
  std::string generator_fingerprint;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  std::string tensor_hash;  // empty when audited without a tensor
  nlohmann::json provenance = nlohmann::json::object();
};

/// Generates n samples (tensor applied when given), labels them with every
/// classifier and reports each marginal plus the requested joints.
AuditReport audit(const GeneratorAdapter& generator, ClassifierSet classifiers, std::size_t n,
                  const FairStyleTensor* tensor, const std::vector<std::vector<std::string>>& joints,
                  std::uint64_t seed);

/// Report over an already labeled batch.
AuditReport report_from_labels(const LabelMatrix& labels, const std::vector<std::vector<std::string>>& joints);

nlohmann::json to_json(const DistributionReport& report);
nlohmann::json to_json(const AuditReport& report);
/// One row per distribution cell.
std::string to_csv(const AuditReport& report);

}  // namespace fairstyle::audit
