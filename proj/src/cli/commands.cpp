#include "fairstyle/cli/commands.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

#include "fairstyle/core/error.hpp"
#include "fairstyle/core/hash.hpp"
#include "fairstyle/synth/text_backend.hpp"

namespace fairstyle::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_text_or_stdout(const fs::path& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
}

json prompts_json(const std::vector<AttributeConfig>& attributes) {
  json out = json::object();
  for (const auto& a : attributes) {
    if (a.prompts) out[a.name] = {{"positive", a.prompts->positive()}, {"negative", a.prompts->negative()}};
  }
  return out;
}

struct Classifiers {
  std::vector<std::shared_ptr<const ClassifierAdapter>> owned;
  std::vector<const ClassifierAdapter*> set;
};

Classifiers classifiers_for(const Workspace& ws, const std::vector<AttributeConfig>& attributes) {
  Classifiers c;
  for (const auto& a : attributes) {
    c.owned.push_back(ws.classifier(a));
    c.set.push_back(c.owned.back().get());
  }
  return c;
}

std::vector<std::string> names_of(const std::vector<AttributeConfig>& attributes) {
  std::vector<std::string> out;
  for (const auto& a : attributes) out.push_back(a.name);
  return out;
}

AuditConfig with_default_joints(AuditConfig config, const std::vector<AttributeConfig>& attributes) {
  if (config.joints.empty() && attributes.size() >= 2) config.joints.push_back(names_of(attributes));
  return config;
}

std::string file_hash(const std::string& bytes) { return to_hex(fnv1a(bytes)); }

}  // namespace

Workspace::Workspace(const GeneratorSource& source) : base_dir_(source.base_dir) {
  if (source.synthetic_spec || source.synthetic_inline) {
    json spec_json;
    if (source.synthetic_inline) {
      spec_json = *source.synthetic_inline;
    } else {
      const auto path = resolve_asset(*source.synthetic_spec, source.base_dir);
      if (!path) throw ConfigError("synthetic spec not found: " + source.synthetic_spec->string(), "generator.synthetic_spec");
      spec_json = read_json(*path);
    }
    synth::SyntheticSpec spec;
    try {
      spec = synth::spec_from_json(spec_json);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("invalid synthetic spec: ") + e.what(), "generator.synthetic_spec");
    }
    model_ = synth::make_synthetic(spec);
    generator_ = model_->generator;
    return;
  }
  if (!source.checkpoint) throw ConfigError("missing generator source", "generator");
  if (!resolve_asset(*source.checkpoint, source.base_dir)) {
    throw ConfigError("generator checkpoint not found: " + source.checkpoint->string(), "generator.checkpoint");
  }
  throw AdapterError("no generator backend for adapter '" + source.adapter + "' is built into this binary");
}

std::shared_ptr<const ClassifierAdapter> Workspace::classifier(const AttributeConfig& attribute) const {
  if (attribute.prompts) {
    if (!model_) throw AdapterError("no text embedding backend is available for this generator");
    if (!text_) text_ = std::make_shared<const synth::SyntheticTextBackend>(*model_);
    try {
      return textclip::as_classifier_adapter(text_, *attribute.prompts, attribute.name);
    } catch (const AdapterError& e) {
      throw ConfigError(e.what(), attribute.field + ".prompts");
    }
  }
  if (!attribute.classifier) throw ConfigError("attribute has no labeling source", attribute.field + ".classifier");
  if (*attribute.classifier == "synthetic") {
    if (!model_) throw ConfigError("\"synthetic\" classifiers need a synthetic generator", attribute.field + ".classifier");
    for (const auto& c : model_->classifiers) {
      if (c->attribute() == attribute.name) return c;
    }
    throw ConfigError("synthetic spec has no attribute '" + attribute.name + "'", attribute.field + ".name");
  }
  if (!resolve_asset(*attribute.classifier, base_dir_)) {
    throw ConfigError("classifier checkpoint not found: " + *attribute.classifier, attribute.field + ".classifier");
  }
  throw AdapterError("no classifier backend for checkpoint " + *attribute.classifier + " is built into this binary");
}

json RunContext::provenance(std::string_view stage) const {
  return {{"config_hash", config_hash},
          {"seed", seed},
          {"stage", std::string(stage)},
          {"stage_seed", stage_seed(seed, stage)}};
}

std::vector<ChannelChoice> choose_channels(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                                           discovery::DiscoveryConfig config, const RunContext& run) {
  std::vector<ChannelChoice> out;
  for (const auto& a : attributes) {
    if (a.channel) {
      ws.generator().layout()->check(*a.channel);
      out.push_back({a.name, *a.channel, std::nullopt});
      continue;
    }
    const auto classifier = ws.classifier(a);
    config.seed = stage_seed(run.seed, "discover/" + a.name);
    auto result = discovery::find_controlling_channel(ws.generator(), *classifier, config);
    out.push_back({a.name, result.best, std::move(result)});
  }
  return out;
}

json channels_json(const std::vector<ChannelChoice>& choices, const RunContext& run) {
  json attributes = json::array();
  for (const auto& c : choices) {
    json entry = {{"name", c.attribute}, {"channel", to_json(c.channel)}, {"discovered", c.discovery.has_value()}};
    if (c.discovery) {
      entry["ranking"] = discovery::to_json(*c.discovery)["ranking"];
      entry["stage_seed"] = stage_seed(run.seed, "discover/" + c.attribute);
    }
    attributes.push_back(std::move(entry));
  }
  return {{"attributes", attributes}, {"provenance", run.provenance("discover")}};
}

debias::FitResult fit_tensor(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                             const std::vector<ChannelChoice>& channels, debias::OptimizerConfig config,
                             const RunContext& run) {
  if (attributes.empty()) throw ConfigError("nothing to debias", "attributes");
  config.seed = stage_seed(run.seed, "debias");
  const auto classifiers = classifiers_for(ws, attributes);
  if (!attributes.front().direction.empty()) {
    if (attributes.size() != 1) throw ConfigError("direction debiasing takes exactly one attribute", "attributes");
    return debias::optimize_text_direction(ws.generator(), *classifiers.set.front(), attributes.front().direction,
                                           config);
  }
  if (channels.size() != attributes.size()) throw ConfigError("need one channel per attribute", "channels");
  if (attributes.size() == 1) {
    return debias::optimize_single(ws.generator(), *classifiers.set.front(), channels.front().channel, config);
  }
  std::vector<ChannelId> targets;
  for (const auto& c : channels) targets.push_back(c.channel);
  return debias::optimize_multi(ws.generator(), classifiers.set, targets, config);
}

TensorDocument tensor_document(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                               const debias::FitResult& fit, const RunContext& run) {
  TensorDocument doc;
  doc.tensor = fit.tensor;
  doc.generator_fingerprint = ws.generator().layout()->fingerprint();
  doc.attribute_names = names_of(attributes);
  doc.created_at = utc_timestamp();
  doc.provenance = run.provenance("debias");
  doc.provenance["optimizer_status"] = std::string(debias::to_string(fit.trace.status));
  doc.provenance["initial_kl"] = fit.trace.initial_kl();
  doc.provenance["best_kl"] = fit.trace.best_kl();
  const auto prompts = prompts_json(attributes);
  if (!prompts.empty()) doc.provenance["prompts"] = prompts;
  return doc;
}

audit::AuditReport audit_generator(const Workspace& ws, const std::vector<AttributeConfig>& attributes,
                                   const FairStyleTensor* tensor, const AuditConfig& config, const RunContext& run) {
  const auto classifiers = classifiers_for(ws, attributes);
  const auto cfg = with_default_joints(config, attributes);
  auto report = audit::audit(ws.generator(), classifiers.set, cfg.n, tensor, cfg.joints, stage_seed(run.seed, "audit"));
  report.provenance = run.provenance("audit");
  const auto prompts = prompts_json(attributes);
  if (!prompts.empty()) report.provenance["prompts"] = prompts;
  return report;
}

int run_discover(const DiscoverOptions& o) {
  if (o.attributes.empty()) throw ConfigError("need at least one attribute", "attribute");
  const Workspace ws(o.generator);
  const RunContext run{o.seed, config_hash({{"command", "discover"},
                                            {"attributes", names_of(o.attributes)},
                                            {"batch_size", o.discovery.batch_size},
                                            {"perturbation", o.discovery.perturbation},
                                            {"exclude_trgb", o.discovery.exclusions.exclude_trgb},
                                            {"exclude_last_blocks", o.discovery.exclusions.exclude_last_blocks},
                                            {"prompts", prompts_json(o.attributes)}})};
  write_json(o.out, channels_json(choose_channels(ws, o.attributes, o.discovery, run), run));
  return 0;
}

int run_debias(const DebiasOptions& o) {
  if (o.attributes.empty()) throw ConfigError("need at least one attribute", "attributes");
  const Workspace ws(o.generator);
  json channels = json::array();
  for (const auto& a : o.attributes) channels.push_back(a.channel ? json(to_string(*a.channel)) : json("auto"));
  const RunContext run{o.seed, config_hash({{"command", "debias"},
                                            {"attributes", names_of(o.attributes)},
                                            {"channels", channels},
                                            {"batch_size", o.optimizer.batch_size},
                                            {"stats_n", o.optimizer.statistics_samples},
                                            {"tolerance", o.optimizer.tolerance},
                                            {"max_iterations", o.optimizer.max_iterations},
                                            {"learning_rate", o.optimizer.learning_rate},
                                            {"fd_step", o.optimizer.fd_step},
                                            {"prompts", prompts_json(o.attributes)}})};
  std::vector<ChannelChoice> choices;
  if (o.attributes.front().direction.empty()) choices = choose_channels(ws, o.attributes, o.discovery, run);
  const auto fit = fit_tensor(ws, o.attributes, choices, o.optimizer, run);
  save_tensor(o.out, tensor_document(ws, o.attributes, fit, run));
  if (!o.trace.empty()) {
    json trace = debias::to_json(fit.trace);
    trace["provenance"] = run.provenance("debias");
    write_json(o.trace, trace);
  }
  return fit.trace.status == debias::TerminalStatus::diverged ? 6 : 0;
}

int run_audit(const AuditOptions& o) {
  if (o.attributes.empty()) throw ConfigError("need at least one attribute", "attributes");
  const Workspace ws(o.generator);
  std::optional<TensorDocument> doc;
  if (o.tensor) doc = load_tensor(*o.tensor, *ws.generator().layout());
  const RunContext run{o.seed, config_hash({{"command", "audit"},
                                            {"attributes", names_of(o.attributes)},
                                            {"n", o.audit.n},
                                            {"joints", o.audit.joints},
                                            {"tensor", doc ? tensor_hash(doc->tensor) : ""},
                                            {"prompts", prompts_json(o.attributes)}})};
  const auto report = audit_generator(ws, o.attributes, doc ? &doc->tensor : nullptr, o.audit, run);
  write_text_or_stdout(o.out, o.format == ReportFormat::csv ? audit::to_csv(report) : audit::to_json(report).dump(2) + "\n");
  return 0;
}

std::string encode_pfm(const Image& image) {
  std::string header = "Pf\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n-1.0\n";
  std::string out = header;
  out.reserve(header.size() + image.pixels.size() * 4);
  for (std::size_t row = image.height; row-- > 0;) {
    for (std::size_t col = 0; col < image.width; ++col) {
      const float v = image.pixels[row * image.width + col];
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFU));
    }
  }
  return out;
}

int run_sample(const SampleOptions& o) {
  if (o.n == 0) throw ConfigError("need at least one sample", "n");
  const Workspace ws(o.generator);
  std::optional<TensorDocument> doc;
  if (o.tensor) doc = load_tensor(*o.tensor, *ws.generator().layout());
  const auto seed = stage_seed(o.seed, "sample");
  const Batch batch = generate_batch(ws.generator(), o.n, doc ? &doc->tensor : nullptr, seed);
  fs::create_directories(o.out_dir);
  json images = json::array();
  for (std::size_t i = 0; i < o.n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.pfm", i);
    const auto bytes = encode_pfm(batch.images[i]);
    write_atomic(o.out_dir / name, bytes);
    images.push_back({{"index", i}, {"file", name}, {"latent_seed", batch.latent_seeds[i]}, {"hash", file_hash(bytes)}});
  }
  const RunContext run{o.seed, config_hash({{"command", "sample"}, {"n", o.n}, {"tensor", doc ? tensor_hash(doc->tensor) : ""}})};
  json manifest = {{"seed", o.seed},
                   {"batch_seed", seed},
                   {"generator_fingerprint", ws.generator().layout()->fingerprint()},
                   {"tensor_hash", doc ? json(tensor_hash(doc->tensor)) : json(nullptr)},
                   {"n", o.n},
                   {"images", images},
                   {"provenance", run.provenance("sample")}};
  if (!o.fid_hook.empty()) {
    const std::string command = o.fid_hook + " '" + o.out_dir.string() + "'";
    const int status = std::system(command.c_str());
    manifest["fid_hook"] = {{"command", o.fid_hook}, {"exit_status", status}};
  }
  write_json(o.out_dir / "manifest.json", manifest);
  return 0;
}

synth::SyntheticSpec preset_spec(const std::string& preset, const std::vector<double>& values, std::uint64_t seed) {
  auto need = [&](std::size_t count) {
    if (values.size() != count) {
      throw ConfigError("preset " + preset + " takes " + std::to_string(count) + " values", "values");
    }
  };
  if (preset == "biased-single") {
    if (values.empty()) return synth::biased_single_spec(0.8);
    need(1);
    return synth::biased_single_spec(values[0]);
  }
  if (preset == "independent-pair") {
    if (values.empty()) return synth::independent_pair_spec(0.8, 0.8);
    need(2);
    return synth::independent_pair_spec(values[0], values[1]);
  }
  if (preset == "correlated-pair") {
    if (values.empty()) return synth::correlated_pair_spec({0.45, 0.35, 0.15, 0.05});
    need(4);
    return synth::correlated_pair_spec({values[0], values[1], values[2], values[3]});
  }
  if (preset == "random-discovery") return synth::random_discovery_spec(seed);
  throw ConfigError("unknown preset '" + preset + "'", "preset");
}

json oracle_summary(const synth::SyntheticModel& model) {
  const auto& oracle = *model.oracle;
  json attributes = json::array();
  for (std::size_t i = 0; i < model.spec.attributes.size(); ++i) {
    const auto& a = model.spec.attributes[i];
    attributes.push_back({{"name", a.name},
                          {"causal", to_json(a.causal)},
                          {"base_rate", oracle.base_rate(i)},
                          {"readout_mean", oracle.readout_mean(i)},
                          {"readout_std", oracle.readout_std(i)},
                          {"threshold", oracle.threshold(i)},
                          {"balancing_offset", oracle.balancing_offset(i)}});
  }
  json pairs = json::array();
  for (std::size_t a = 0; a < model.spec.attributes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.spec.attributes.size(); ++b) {
      const auto cells = oracle.joint_cells(a, b);
      pairs.push_back({{"attributes", {model.spec.attributes[a].name, model.spec.attributes[b].name}},
                       {"cells", cells}});
    }
  }
  return {{"generator_fingerprint", model.generator->layout()->fingerprint()},
          {"attributes", attributes},
          {"pairs", pairs}};
}

int run_synth(const SynthOptions& o) {
  if (o.spec.has_value() == !o.preset.empty()) throw ConfigError("give exactly one of --spec or --preset", "spec");
  synth::SyntheticSpec spec;
  if (o.spec) {
    try {
      spec = synth::spec_from_json(read_json(*o.spec));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("invalid synthetic spec: ") + e.what(), e.field().empty() ? "spec" : e.field());
    }
  } else {
    spec = preset_spec(o.preset, o.preset_values, o.preset_seed);
  }
  const auto model = synth::make_synthetic(spec);
  if (!o.emit_spec.empty()) write_json(o.emit_spec, synth::to_json(spec));
  write_text_or_stdout(o.out, oracle_summary(model).dump(2) + "\n");
  return 0;
}

int run_pipeline(const PipelineConfig& c) {
  const Workspace ws(c.generator);
  const RunContext run{c.seed, c.config_hash};
  fs::create_directories(c.output_dir);

  std::vector<ChannelChoice> choices;
  const bool direction = !c.attributes.front().direction.empty();
  if (!direction) choices = choose_channels(ws, c.attributes, c.discovery, run);
  json channels = channels_json(choices, run);
  if (direction) {
    json dir = json::array();
    for (const auto& [id, w] : c.attributes.front().direction) {
      dir.push_back({{"layer", id.layer}, {"channel", id.channel}, {"weight", w}});
    }
    channels["direction"] = dir;
  }
  write_json(c.output_dir / "channels.json", channels);

  auto before = audit_generator(ws, c.attributes, nullptr, c.audit, run);
  before.provenance["stage"] = "audit-before";
  write_json(c.output_dir / "report_before.json", audit::to_json(before));

  const auto fit = fit_tensor(ws, c.attributes, choices, c.optimizer, run);
  const auto doc = tensor_document(ws, c.attributes, fit, run);
  save_tensor(c.output_dir / "tensor.json", doc);
  json trace = debias::to_json(fit.trace);
  trace["provenance"] = run.provenance("debias");
  write_json(c.output_dir / "trace.json", trace);

  auto after = audit_generator(ws, c.attributes, &doc.tensor, c.audit, run);
  after.provenance["stage"] = "audit-after";
  write_json(c.output_dir / "report_after.json", audit::to_json(after));
  return fit.trace.status == debias::TerminalStatus::diverged ? 6 : 0;
}

}  // namespace fairstyle::cli
