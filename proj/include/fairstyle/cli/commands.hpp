#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairstyle/audit/audit.hpp"
#include "fairstyle/cli/config.hpp"
#include "fairstyle/core/tensor_io.hpp"
#include "fairstyle/synth/synthetic.hpp"

namespace fairstyle::cli {

/// Generator plus the classifiers a command needs, resolved from config.
class Workspace {
 public:
  explicit Workspace(const GeneratorSource& source);

  const GeneratorAdapter& generator() const { return *generator_; }
  const synth::SyntheticModel* synthetic() const { return model_ ? &*model_ : nullptr; }

  std::shared_ptr<const ClassifierAdapter> classifier(const AttributeConfig& attribute) const;

 private:
  std::shared_ptr<const GeneratorAdapter> generator_;
  std::optional<synth::SyntheticModel> model_;
  mutable std::shared_ptr<const textclip::EmbeddingBackend> text_;
  std::filesystem::path base_dir_;
};

/// Seed and config hash stamped into every artifact.
struct RunContext {
  std::uint64_t seed = 0;
  std::string config_hash;

  nlohmann::json provenance(std::string_view stage) const;
};

struct ChannelChoice {
  std::string attribute;
  ChannelId channel;
  std::optional<discovery::DiscoveryResult> discovery;  // empty when the channel was given
};

/// Uses the configured channel when present, otherwise discovers it with
/// the "discover/<name>" stage seed.
std::vector<ChannelChoice> choose_channels(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                                           discovery::DiscoveryConfig config, const RunContext& run);
nlohmann::json channels_json(const std::vector<ChannelChoice>& choices, const RunContext& run);

/// Scalar fit for one attribute, direction fit when the attribute carries a
/// direction, coupled fit for two or more.
debias::FitResult fit_tensor(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                             const std::vector<ChannelChoice>& channels, debias::OptimizerConfig config,
                             const RunContext& run);
TensorDocument tensor_document(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                               const debias::FitResult& fit, const RunContext& run);

audit::AuditReport audit_generator(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                                   const FairStyleTensor* tensor, const AuditConfig& config, const RunContext& run);

// Subcommands. Each writes its artifacts and returns the process exit code.

struct DiscoverOptions {
  GeneratorSource generator;
  std::vector<AttributeConfig> attributes;
  discovery::DiscoveryConfig discovery;
  std::uint64_t seed = 0;
  std::filesystem::path out = "channels.json";
};
int run_discover(const DiscoverOptions& options);

struct DebiasOptions {
  GeneratorSource generator;
  std::vector<AttributeConfig> attributes;
  discovery::DiscoveryConfig discovery;
  debias::OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::filesystem::path out = "tensor.json";
  std::filesystem::path trace;  // empty: no trace file
};
int run_debias(const DebiasOptions& options);

enum class ReportFormat { json, csv };

struct AuditOptions {
  GeneratorSource generator;
  std::vector<AttributeConfig> attributes;
  std::optional<std::filesystem::path> tensor;
  AuditConfig audit;
  ReportFormat format = ReportFormat::json;
  std::uint64_t seed = 0;
  std::filesystem::path out;  // empty: stdout
};
int run_audit(const AuditOptions& options);

struct SampleOptions {
  GeneratorSource generator;
  std::optional<std::filesystem::path> tensor;
  std::size_t n = 16;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "samples";
  std::string fid_hook;  // command run as `<hook> <out_dir>` after writing
};
int run_sample(const SampleOptions& options);

struct SynthOptions {
  std::optional<std::filesystem::path> spec;
  std::string preset;  // biased-single | independent-pair | correlated-pair | random-discovery
  std::vector<double> preset_values;
  std::uint64_t preset_seed = 0;
  std::filesystem::path emit_spec;  // where to write the spec; empty: not written
  std::filesystem::path out;        // oracle summary; empty: stdout
};
int run_synth(const SynthOptions& options);
nlohmann::json oracle_summary(const synth::SyntheticModel& model);
synth::SyntheticSpec preset_spec(const std::string& preset, const std::vector<double>& values, std::uint64_t seed);

/// discover -> audit before -> debias -> audit after, all under the output
/// directory of the config.
int run_pipeline(const PipelineConfig& config);

/// Grayscale PFM (little endian, bottom row first).
std::string encode_pfm(const Image& image);

}  // namespace fairstyle::cli
