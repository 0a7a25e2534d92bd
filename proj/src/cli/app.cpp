#include "fairstyle/cli/app.hpp"

#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairstyle/cli/commands.hpp"

namespace fairstyle::cli {

namespace fs = std::filesystem;

namespace {

struct GeneratorFlags {
  std::string spec;
  std::string checkpoint;
  std::string adapter;

  void add(CLI::App* cmd) {
    cmd->add_option("--spec", spec, "Synthetic spec JSON");
    cmd->add_option("--checkpoint", checkpoint, "Generator checkpoint (real-model adapters)");
    cmd->add_option("--adapter", adapter, "Adapter name for --checkpoint");
  }

  GeneratorSource source() const {
    GeneratorSource g;
    g.base_dir = ".";
    if (!spec.empty()) g.synthetic_spec = spec;
    if (!checkpoint.empty()) g.checkpoint = checkpoint;
    g.adapter = adapter;
    if (spec.empty() == checkpoint.empty()) throw ConfigError("give exactly one of --spec or --checkpoint", "generator");
    if (!checkpoint.empty() && adapter.empty()) throw ConfigError("--checkpoint needs --adapter", "adapter");
    return g;
  }
};

struct AttributeFlags {
  std::vector<std::string> classifiers;  // NAME=PATH
  std::string text_positive;
  std::string text_negative;
  std::string text_attribute = "text";

  void add(CLI::App* cmd) {
    cmd->add_option("--classifier", classifiers, "NAME=PATH classifier checkpoint (default: the synthetic classifier)");
    cmd->add_option("--text-positive", text_positive, "Positive prompt of a text-labeled attribute");
    cmd->add_option("--text-negative", text_negative, "Negative prompt of a text-labeled attribute");
    cmd->add_option("--text-attribute", text_attribute, "Name of the text-labeled attribute")->capture_default_str();
  }

  std::vector<AttributeConfig> build(const std::vector<std::string>& names) const {
    std::map<std::string, std::string> paths;
    for (const auto& c : classifiers) {
      const auto eq = c.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("expected NAME=PATH, got '" + c + "'", "classifier");
      paths[c.substr(0, eq)] = c.substr(eq + 1);
    }
    std::vector<AttributeConfig> out;
    for (const auto& n : names) {
      AttributeConfig a;
      a.name = n;
      a.field = "attributes";
      const auto it = paths.find(n);
      a.classifier = it == paths.end() ? "synthetic" : it->second;
      if (it != paths.end()) paths.erase(it);
      out.push_back(std::move(a));
    }
    if (!paths.empty()) throw ConfigError("--classifier names unknown attribute '" + paths.begin()->first + "'", "classifier");
    if (text_positive.empty() != text_negative.empty()) {
      throw ConfigError("--text-positive and --text-negative go together", "text-positive");
    }
    if (!text_positive.empty()) {
      AttributeConfig a;
      a.name = text_attribute;
      a.field = "text";
      a.prompts = textclip::PromptPair(text_positive, text_negative);
      out.push_back(std::move(a));
    }
    return out;
  }
};

void add_discovery_flags(CLI::App* cmd, discovery::DiscoveryConfig& d) {
  cmd->add_option("--batch-size", d.batch_size, "Style codes per candidate channel")->capture_default_str();
  cmd->add_option("--perturbation", d.perturbation, "Channel perturbation c")->capture_default_str();
  cmd->add_option("--exclude-last-blocks", d.exclusions.exclude_last_blocks, "Synthesis blocks excluded from search")
      ->capture_default_str();
  cmd->add_flag("!--include-trgb", d.exclusions.exclude_trgb, "Also search tRGB layers");
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::address:
    case ErrorKind::degenerate: return 2;
    case ErrorKind::fingerprint: return 3;
    case ErrorKind::adapter: return 4;
    case ErrorKind::io: return 5;
  }
  return 1;
}

std::string error_json(const Error& e) {
  nlohmann::json j = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (!e.field().empty()) j["field"] = e.field();
  return nlohmann::json{{"error", j}}.dump();
}

int run_cli(int argc, const char* const* argv, std::ostream& err) {
  CLI::App app{"Debias style-based generators by editing style channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fairstyle 0.1.0");

  std::uint64_t seed = 0;
  GeneratorFlags gen;
  AttributeFlags attr;

  // discover
  DiscoverOptions disc;
  std::string disc_attribute;
  std::string disc_out = "channels.json";
  auto* discover = app.add_subcommand("discover", "Find the style channel controlling an attribute");
  gen.add(discover);
  attr.add(discover);
  discover->add_option("--attribute", disc_attribute, "Attribute name");
  add_discovery_flags(discover, disc.discovery);
  discover->add_option("--seed", seed, "Global seed")->capture_default_str();
  discover->add_option("--out", disc_out, "Output JSON")->capture_default_str();

  // debias
  DebiasOptions deb;
  std::string deb_attributes;
  std::string deb_channels = "auto";
  std::string deb_direction;
  std::string deb_out = "tensor.json";
  std::string deb_trace;
  bool fixed_batch = false;
  bool hard_loss = false;
  auto* debias_cmd = app.add_subcommand("debias", "Fit a fairstyle tensor");
  gen.add(debias_cmd);
  attr.add(debias_cmd);
  debias_cmd->add_option("--attributes", deb_attributes, "Comma-separated attribute names");
  debias_cmd->add_option("--channels", deb_channels, "auto or \"(i,j);(i,j)\", one per attribute")->capture_default_str();
  debias_cmd->add_option("--direction", deb_direction, "Style direction \"(i,j):w;...\" to scale instead");
  debias_cmd->add_option("--n", deb.optimizer.batch_size, "Batch size per iteration")->capture_default_str();
  debias_cmd->add_option("--stats-n", deb.optimizer.statistics_samples, "Samples for channel statistics")
      ->capture_default_str();
  debias_cmd->add_option("--eval-n", deb.optimizer.evaluation_samples, "Fixed evaluation batch that scores each iterate")
      ->capture_default_str();
  debias_cmd->add_option("--tol", deb.optimizer.tolerance, "Hard-label KL tolerance")->capture_default_str();
  debias_cmd->add_option("--max-iters", deb.optimizer.max_iterations, "Iteration cap")->capture_default_str();
  debias_cmd->add_option("--lr", deb.optimizer.learning_rate, "Learning rate")->capture_default_str();
  debias_cmd->add_option("--fd-step", deb.optimizer.fd_step, "Finite-difference step")->capture_default_str();
  debias_cmd->add_flag("--fixed-batch", fixed_batch, "Reuse one batch for every iteration");
  debias_cmd->add_flag("--hard-loss", hard_loss, "Descend the hard-label KL instead of the soft one");
  add_discovery_flags(debias_cmd, deb.discovery);
  debias_cmd->add_option("--seed", seed, "Global seed")->capture_default_str();
  debias_cmd->add_option("--out", deb_out, "Tensor JSON")->capture_default_str();
  debias_cmd->add_option("--trace", deb_trace, "Optimization trace JSON");

  // audit
  AuditOptions aud;
  std::string aud_attributes;
  std::string aud_tensor;
  std::vector<std::string> aud_joints;
  std::string aud_format = "json";
  bool aud_csv = false;
  std::string aud_out;
  auto* audit_cmd = app.add_subcommand("audit", "Report attribute distributions and KL to uniform");
  gen.add(audit_cmd);
  attr.add(audit_cmd);
  audit_cmd->add_option("--attributes", aud_attributes, "Comma-separated attribute names");
  audit_cmd->add_option("--tensor", aud_tensor, "Apply this tensor before labeling");
  audit_cmd->add_option("--n", aud.audit.n, "Samples")->capture_default_str();
  audit_cmd->add_option("--joint", aud_joints, "Comma-separated joint to report (repeatable)");
  audit_cmd->add_option("--format", aud_format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  audit_cmd->add_flag("--csv", aud_csv, "Same as --format csv");
  audit_cmd->add_option("--seed", seed, "Global seed")->capture_default_str();
  audit_cmd->add_option("--out", aud_out, "Output file (default stdout)");

  // sample
  SampleOptions smp;
  std::string smp_tensor;
  std::string smp_out = "samples";
  auto* sample_cmd = app.add_subcommand("sample", "Write images and a manifest");
  gen.add(sample_cmd);
  sample_cmd->add_option("--tensor", smp_tensor, "Apply this tensor");
  sample_cmd->add_option("--n", smp.n, "Images")->capture_default_str();
  sample_cmd->add_option("--seed", seed, "Global seed")->capture_default_str();
  sample_cmd->add_option("--out-dir", smp_out, "Output directory")->capture_default_str();
  sample_cmd->add_option("--fid-hook", smp.fid_hook, "Command run with the output directory as argument");

  // synth
  SynthOptions syn;
  std::string syn_spec;
  std::string syn_emit;
  std::string syn_out;
  auto* synth_cmd = app.add_subcommand("synth", "Materialize a synthetic generator and print its oracle answers");
  synth_cmd->add_option("--spec", syn_spec, "Synthetic spec JSON");
  synth_cmd->add_option("--preset", syn.preset, "biased-single | independent-pair | correlated-pair | random-discovery");
  synth_cmd->add_option("--values", syn.preset_values, "Preset parameters (base rates or joint cells)")->delimiter(',');
  synth_cmd->add_option("--preset-seed", syn.preset_seed, "Seed of random-discovery")->capture_default_str();
  synth_cmd->add_option("--emit-spec", syn_emit, "Write the spec JSON here");
  synth_cmd->add_option("--out", syn_out, "Oracle summary JSON (default stdout)");

  // pipeline
  std::string pipe_config;
  std::string pipe_out;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "discover, audit, debias and audit again from a config file");
  pipeline_cmd->add_option("--config", pipe_config, "Pipeline config JSON")->required();
  pipeline_cmd->add_option("--output-dir", pipe_out, "Override the config's output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, std::cout, err);
  }

  try {
    if (discover->parsed()) {
      disc.generator = gen.source();
      disc.attributes = attr.build(disc_attribute.empty() ? std::vector<std::string>{} : std::vector{disc_attribute});
      disc.seed = seed;
      disc.out = disc_out;
      return run_discover(disc);
    }
    if (debias_cmd->parsed()) {
      deb.generator = gen.source();
      deb.attributes = attr.build(deb_attributes.empty() ? std::vector<std::string>{} : split_names(deb_attributes));
      if (deb.attributes.empty()) throw ConfigError("need --attributes or a prompt pair", "attributes");
      if (deb_channels != "auto") {
        if (!deb_direction.empty()) throw ConfigError("--channels and --direction are exclusive", "channels");
        const auto channels = parse_channel_list(deb_channels);
        if (channels.size() != deb.attributes.size()) {
          throw ConfigError("--channels lists " + std::to_string(channels.size()) + " channels for " +
                                std::to_string(deb.attributes.size()) + " attributes",
                            "channels");
        }
        for (std::size_t i = 0; i < channels.size(); ++i) deb.attributes[i].channel = channels[i];
      }
      if (!deb_direction.empty()) {
        if (deb.attributes.size() != 1) throw ConfigError("--direction takes exactly one attribute", "direction");
        deb.attributes.front().direction = parse_direction(deb_direction);
      }
      deb.optimizer.batch_policy = fixed_batch ? debias::BatchPolicy::fixed : debias::BatchPolicy::fresh;
      deb.optimizer.soft_loss = !hard_loss;
      deb.seed = seed;
      deb.out = deb_out;
      deb.trace = deb_trace;
      return run_debias(deb);
    }
    if (audit_cmd->parsed()) {
      aud.generator = gen.source();
      aud.attributes = attr.build(aud_attributes.empty() ? std::vector<std::string>{} : split_names(aud_attributes));
      for (const auto& j : aud_joints) aud.audit.joints.push_back(split_names(j));
      if (!aud_tensor.empty()) aud.tensor = aud_tensor;
      aud.format = (aud_csv || aud_format == "csv") ? ReportFormat::csv : ReportFormat::json;
      aud.seed = seed;
      aud.out = aud_out;
      return run_audit(aud);
    }
    if (sample_cmd->parsed()) {
      smp.generator = gen.source();
      if (!smp_tensor.empty()) smp.tensor = smp_tensor;
      smp.seed = seed;
      smp.out_dir = smp_out;
      return run_sample(smp);
    }
    if (synth_cmd->parsed()) {
      if (!syn_spec.empty()) syn.spec = syn_spec;
      syn.emit_spec = syn_emit;
      syn.out = syn_out;
      return run_synth(syn);
    }
    if (pipeline_cmd->parsed()) {
      auto config = load_pipeline_config(pipe_config);
      if (!pipe_out.empty()) config.output_dir = pipe_out;
      return run_pipeline(config);
    }
  } catch (const Error& e) {
    err << error_json(e) << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace fairstyle::cli
