#include "fairstyle/audit/audit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "fairstyle/core/error.hpp"
#include "fairstyle/core/tensor_io.hpp"

namespace fairstyle::audit {

using nlohmann::json;

namespace {

std::size_t column_of(const std::vector<std::string>& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown attribute '" + std::string(name) + "'", "attributes");
  return static_cast<std::size_t>(std::distance(names.begin(), it));
}

void check_subset(const std::vector<std::string>& subset) {
  if (subset.empty()) throw ConfigError("attribute subset is empty", "attributes");
  if (subset.size() > 20) throw ConfigError("too many attributes in one distribution", "attributes");
  if (std::set<std::string>(subset.begin(), subset.end()).size() != subset.size()) {
    throw ConfigError("attribute subset repeats a name", "attributes");
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string AttributeDistribution::cell_label(std::size_t cell) const {
  const std::size_t m = attributes.size();
  std::string out(m, '0');
  for (std::size_t i = 0; i < m; ++i) {
    if ((cell >> (m - 1 - i)) & 1U) out[i] = '1';
  }
  return out;
}

AttributeDistribution from_counts(std::vector<std::string> attributes, std::vector<std::size_t> counts) {
  check_subset(attributes);
  if (counts.size() != (std::size_t{1} << attributes.size())) {
    throw ConfigError("distribution over " + std::to_string(attributes.size()) + " attributes needs " +
                      std::to_string(std::size_t{1} << attributes.size()) + " cells");
  }
  AttributeDistribution d;
  d.attributes = std::move(attributes);
  d.counts = std::move(counts);
  for (auto c : d.counts) d.sample_count += c;
  if (d.sample_count == 0) throw ConfigError("distribution has no samples");
  d.probabilities.reserve(d.counts.size());
  for (auto c : d.counts) d.probabilities.push_back(static_cast<double>(c) / static_cast<double>(d.sample_count));
  return d;
}

LabelMatrix label_batch(ClassifierSet classifiers, std::span<const Image> images) {
  if (images.empty()) throw ConfigError("cannot label an empty batch");
  return threshold_scores(classifiers, score_batch(classifiers, images));
}

AttributeDistribution empirical_distribution(const LabelMatrix& labels, const std::vector<std::string>& subset) {
  check_subset(subset);
  if (labels.rows == 0) throw ConfigError("label matrix is empty");
  std::vector<std::size_t> cols;
  for (const auto& name : subset) cols.push_back(column_of(labels.attributes, name));
  std::vector<std::size_t> counts(std::size_t{1} << subset.size(), 0);
  for (std::size_t r = 0; r < labels.rows; ++r) {
    std::size_t cell = 0;
    for (auto c : cols) cell = (cell << 1) | (labels.at(r, c) ? 1U : 0U);
    ++counts[cell];
  }
  return from_counts(subset, std::move(counts));
}

AttributeDistribution marginalize(const AttributeDistribution& joint, const std::vector<std::string>& subset) {
  check_subset(subset);
  const std::size_t m = joint.attributes.size();
  std::vector<std::size_t> bits;
  for (const auto& name : subset) bits.push_back(m - 1 - column_of(joint.attributes, name));
  std::vector<std::size_t> counts(std::size_t{1} << subset.size(), 0);
  for (std::size_t cell = 0; cell < joint.counts.size(); ++cell) {
    std::size_t target = 0;
    for (auto b : bits) target = (target << 1) | ((cell >> b) & 1U);
    counts[target] += joint.counts[cell];
  }
  return from_counts(subset, std::move(counts));
}

std::vector<double> soft_cells(const ScoreMatrix& scores) {
  if (scores.rows == 0 || scores.cols == 0) throw ConfigError("score matrix is empty");
  const std::size_t m = scores.cols;
  const std::size_t cells = std::size_t{1} << m;
  std::vector<double> out(cells, 0.0);
  for (std::size_t r = 0; r < scores.rows; ++r) {
    for (std::size_t cell = 0; cell < cells; ++cell) {
      double p = 1.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double s = scores.at(r, i);
        p *= ((cell >> (m - 1 - i)) & 1U) ? s : 1.0 - s;
      }
      out[cell] += p;
    }
  }
  for (auto& v : out) v /= static_cast<double>(scores.rows);
  return out;
}

double kl_to_uniform(std::span<const double> probabilities) {
  const std::size_t cells = probabilities.size();
  if (cells < 2 || !std::has_single_bit(cells)) throw ConfigError("cell count must be a power of two >= 2");
  const double n = static_cast<double>(cells);
  double kl = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) kl += p * std::log(p * n);
  }
  return std::max(kl, 0.0);
}

double kl_to_uniform(const AttributeDistribution& dist) { return kl_to_uniform(dist.probabilities); }

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

DistributionReport summarize(AttributeDistribution dist) {
  DistributionReport r;
  r.kl = kl_to_uniform(dist);
  for (auto c : dist.counts) r.intervals.push_back(wilson_interval(c, dist.sample_count));
  r.distribution = std::move(dist);
  return r;
}

AuditReport report_from_labels(const LabelMatrix& labels, const std::vector<std::vector<std::string>>& joints) {
  AuditReport report;
  report.sample_count = labels.rows;
  for (const auto& name : labels.attributes) report.marginals.push_back(summarize(empirical_distribution(labels, {name})));
  for (const auto& j : joints) report.joints.push_back(summarize(empirical_distribution(labels, j)));
  return report;
}

AuditReport audit(const GeneratorAdapter& generator, ClassifierSet classifiers, std::size_t n,
                  const FairStyleTensor* tensor, const std::vector<std::vector<std::string>>& joints,
                  std::uint64_t seed) {
  const Batch batch = generate_batch(generator, n, tensor, seed);
  AuditReport report = report_from_labels(label_batch(classifiers, batch.images), joints);
  report.generator_fingerprint = generator.layout()->fingerprint();
  report.seed = seed;
  if (tensor) report.tensor_hash = tensor_hash(*tensor);
  return report;
}

json to_json(const DistributionReport& r) {
  const auto& d = r.distribution;
  json cells = json::array();
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    cells.push_back({{"labels", d.cell_label(c)},
                     {"count", d.counts[c]},
                     {"probability", d.probabilities[c]},
                     {"ci95", {r.intervals[c].low, r.intervals[c].high}}});
  }
  return {{"attributes", d.attributes}, {"sample_count", d.sample_count}, {"kl_to_uniform", r.kl}, {"cells", cells}};
}

json to_json(const AuditReport& report) {
  json marginals = json::array();
  for (const auto& m : report.marginals) marginals.push_back(to_json(m));
  json joints = json::array();
  for (const auto& j : report.joints) joints.push_back(to_json(j));
  json out = {{"generator_fingerprint", report.generator_fingerprint},
              {"seed", report.seed},
              {"sample_count", report.sample_count},
              {"marginals", marginals},
              {"joints", joints},
              {"provenance", report.provenance}};
  if (!report.tensor_hash.empty()) out["tensor_hash"] = report.tensor_hash;
  return out;
}

std::string to_csv(const AuditReport& report) {
  std::ostringstream os;
  os << "distribution,labels,count,probability,ci_low,ci_high,kl_to_uniform\n";
  auto rows = [&](const DistributionReport& r) {
    std::string name;
    for (const auto& a : r.distribution.attributes) name += (name.empty() ? "" : "+") + a;
    for (std::size_t c = 0; c < r.distribution.cell_count(); ++c) {
      os << name << ',' << r.distribution.cell_label(c) << ',' << r.distribution.counts[c] << ','
         << format_double(r.distribution.probabilities[c]) << ',' << format_double(r.intervals[c].low) << ','
         << format_double(r.intervals[c].high) << ',' << format_double(r.kl) << '\n';
    }
  };
  for (const auto& m : report.marginals) rows(m);
  for (const auto& j : report.joints) rows(j);
  return os.str();
}

}  // namespace fairstyle::audit
