#include "fairstyle/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>

#include "fairstyle/core/error.hpp"
#include "fairstyle/core/hash.hpp"
#include "fairstyle/core/tensor_io.hpp"

namespace fairstyle::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  s = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
  }

  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  bool has(std::string_view key) const { return j_.contains(key); }

  const json* raw(std::string_view key) {
    used_.insert(std::string(key));
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  std::optional<T> get(std::string_view key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    try {
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!non_negative_integer(*v)) throw ConfigError("expected a non-negative integer", field(key));
      }
      return v->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("wrong type", field(key));
    }
  }

  template <typename T>
  T get_or(std::string_view key, T fallback) {
    return get<T>(key).value_or(fallback);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.contains(k)) throw ConfigError("unknown field", field(k));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-raises a ConfigError without a field under `field`.
template <typename F>
auto with_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (!e.field().empty()) throw;
    throw ConfigError(e.what(), field);
  }
}

ChannelId channel_value(const json& j, const std::string& field) {
  return with_field(field, [&] {
    if (j.is_string()) return parse_channel(j.get<std::string>());
    if (j.is_array() && j.size() == 2 && non_negative_integer(j[0]) && non_negative_integer(j[1])) {
      return ChannelId{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
    }
    if (j.is_object()) {
      try {
        return channel_from_json(j);
      } catch (const json::exception&) {
      }
    }
    throw ConfigError("expected a channel such as \"(2,5)\" or [2, 5]");
  });
}

GeneratorSource parse_generator(const json& j, const fs::path& base_dir) {
  Fields f(j, "generator");
  GeneratorSource g;
  g.base_dir = base_dir;
  if (const json* s = f.raw("synthetic_spec")) {
    if (s->is_string()) {
      g.synthetic_spec = s->get<std::string>();
    } else if (s->is_object()) {
      g.synthetic_inline = *s;
    } else {
      throw ConfigError("expected a path or an inline spec", f.field("synthetic_spec"));
    }
  }
  if (auto c = f.get<std::string>("checkpoint")) g.checkpoint = *c;
  g.adapter = f.get_or<std::string>("adapter", "");
  f.finish();
  const bool synthetic = g.synthetic_spec || g.synthetic_inline;
  if (synthetic == g.checkpoint.has_value()) {
    throw ConfigError("exactly one of synthetic_spec or checkpoint is required", "generator");
  }
  if (g.checkpoint && g.adapter.empty()) throw ConfigError("a checkpoint needs an adapter name", "generator.adapter");
  if (!g.checkpoint && !g.adapter.empty()) throw ConfigError("adapter is only valid with a checkpoint", "generator.adapter");
  return g;
}

AttributeConfig parse_attribute(const json& j, std::size_t index) {
  const std::string path = "attributes[" + std::to_string(index) + "]";
  Fields f(j, path);
  AttributeConfig a;
  a.field = path;
  a.name = f.get_or<std::string>("name", "");
  if (a.name.empty()) throw ConfigError("attribute needs a name", f.field("name"));
  if (auto c = f.get<std::string>("classifier")) {
    if (c->empty()) throw ConfigError("classifier path is empty", f.field("classifier"));
    a.classifier = *c;
  }
  if (const json* p = f.raw("prompts")) {
    Fields pf(*p, f.field("prompts"));
    const auto pos = pf.get_or<std::string>("positive", "");
    const auto neg = pf.get_or<std::string>("negative", "");
    pf.finish();
    a.prompts = with_field(f.field("prompts"), [&] { return textclip::PromptPair(pos, neg); });
  }
  if (a.classifier.has_value() == a.prompts.has_value()) {
    throw ConfigError("exactly one of classifier or prompts is required", f.field("classifier"));
  }
  if (const json* c = f.raw("channel")) a.channel = channel_value(*c, f.field("channel"));
  if (const json* d = f.raw("direction")) {
    const auto field = f.field("direction");
    if (d->is_string()) {
      a.direction = with_field(field, [&] { return parse_direction(d->get<std::string>()); });
    } else if (d->is_array()) {
      for (std::size_t i = 0; i < d->size(); ++i) {
        const auto entry = field + "[" + std::to_string(i) + "]";
        const json& e = (*d)[i];
        if (!e.is_object() || !e.contains("weight") || !e["weight"].is_number()) {
          throw ConfigError("expected {layer, channel, weight}", entry);
        }
        a.direction.emplace_back(channel_value(json{{"layer", e.value("layer", json())}, {"channel", e.value("channel", json())}}, entry),
                                 e["weight"].get<double>());
      }
    } else {
      throw ConfigError("expected a direction string or list", field);
    }
    if (a.direction.empty()) throw ConfigError("direction is empty", field);
  }
  if (a.channel && !a.direction.empty()) throw ConfigError("channel and direction are exclusive", f.field("direction"));
  f.finish();
  return a;
}

discovery::DiscoveryConfig parse_discovery(const json& j) {
  Fields f(j, "discovery");
  discovery::DiscoveryConfig d;
  d.batch_size = f.get_or<std::size_t>("batch_size", d.batch_size);
  d.perturbation = f.get_or<double>("perturbation", d.perturbation);
  d.exclusions.exclude_trgb = f.get_or<bool>("exclude_trgb", d.exclusions.exclude_trgb);
  d.exclusions.exclude_last_blocks = f.get_or<int>("exclude_last_blocks", d.exclusions.exclude_last_blocks);
  f.finish();
  with_field("discovery", [&] { d.validate(); });
  return d;
}

debias::OptimizerConfig parse_optimizer(const json& j) {
  Fields f(j, "optimizer");
  debias::OptimizerConfig o;
  o.batch_size = f.get_or<std::size_t>("batch_size", o.batch_size);
  o.max_iterations = f.get_or<std::size_t>("max_iterations", o.max_iterations);
  o.tolerance = f.get_or<double>("tolerance", o.tolerance);
  o.fd_step = f.get_or<double>("fd_step", o.fd_step);
  o.learning_rate = f.get_or<double>("learning_rate", o.learning_rate);
  o.halve_after = f.get_or<std::size_t>("halve_after", o.halve_after);
  o.converge_after = f.get_or<std::size_t>("converge_after", o.converge_after);
  o.soft_loss = f.get_or<bool>("soft_loss", o.soft_loss);
  o.statistics_samples = f.get_or<std::size_t>("statistics_samples", o.statistics_samples);
  o.evaluation_samples = f.get_or<std::size_t>("evaluation_samples", o.evaluation_samples);
  if (auto p = f.get<std::string>("batch_policy")) {
    if (*p == "fresh") {
      o.batch_policy = debias::BatchPolicy::fresh;
    } else if (*p == "fixed") {
      o.batch_policy = debias::BatchPolicy::fixed;
    } else {
      throw ConfigError("expected \"fresh\" or \"fixed\"", f.field("batch_policy"));
    }
  }
  f.finish();
  try {
    o.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), "optimizer." + e.field());
  }
  return o;
}

AuditConfig parse_audit(const json& j, const std::vector<AttributeConfig>& attributes) {
  Fields f(j, "audit");
  AuditConfig a;
  a.n = f.get_or<std::size_t>("n", a.n);
  if (a.n == 0) throw ConfigError("audit needs at least one sample", "audit.n");
  if (const json* joints = f.raw("joints")) {
    try {
      a.joints = joints->get<std::vector<std::vector<std::string>>>();
    } catch (const json::exception&) {
      throw ConfigError("expected a list of attribute name lists", "audit.joints");
    }
  }
  f.finish();
  for (std::size_t i = 0; i < a.joints.size(); ++i) {
    for (const auto& name : a.joints[i]) {
      const bool known = std::any_of(attributes.begin(), attributes.end(), [&](const auto& x) { return x.name == name; });
      if (!known) throw ConfigError("unknown attribute '" + name + "'", "audit.joints[" + std::to_string(i) + "]");
    }
  }
  return a;
}

}  // namespace

std::string config_hash(const json& j) { return to_hex(fnv1a(j.dump())); }

std::uint64_t stage_seed(std::uint64_t global_seed, std::string_view stage) { return derive_seed(global_seed, stage); }

ChannelId parse_channel(std::string_view text) {
  auto s = trim(text);
  if (!s.empty() && s.front() == '(') {
    if (s.back() != ')') throw ConfigError("unbalanced parenthesis in channel '" + std::string(text) + "'");
    s = s.substr(1, s.size() - 2);
  }
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError("channel must look like (layer,channel): '" + std::string(text) + "'");
  return {parse_number<std::size_t>(parts[0], "layer"), parse_number<std::size_t>(parts[1], "channel")};
}

std::vector<ChannelId> parse_channel_list(std::string_view text) {
  std::vector<ChannelId> out;
  for (auto part : split(text, ';')) {
    if (part.empty()) throw ConfigError("empty entry in channel list '" + std::string(text) + "'", "channels");
    out.push_back(parse_channel(part));
  }
  return out;
}

SparseBias parse_direction(std::string_view text) {
  SparseBias out;
  for (auto part : split(text, ';')) {
    const auto colon = part.rfind(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("direction entries look like (layer,channel):weight, got '" + std::string(part) + "'", "direction");
    }
    out.emplace_back(parse_channel(part.substr(0, colon)), parse_number<double>(part.substr(colon + 1), "weight"));
  }
  return out;
}

std::vector<std::string> split_names(std::string_view text) {
  std::vector<std::string> out;
  for (auto part : split(text, ',')) {
    if (part.empty()) throw ConfigError("empty attribute name in '" + std::string(text) + "'", "attributes");
    out.emplace_back(part);
  }
  return out;
}

std::optional<fs::path> resolve_asset(const fs::path& path, const fs::path& base_dir) {
  std::vector<fs::path> candidates;
  if (path.is_absolute()) {
    candidates.push_back(path);
  } else {
    candidates.push_back(base_dir / path);
    if (const char* cache = std::getenv("FAIRSTYLE_CACHE"); cache && *cache) candidates.push_back(fs::path(cache) / path);
  }
  for (const auto& c : candidates) {
    std::error_code ec;
    if (fs::exists(c, ec)) return c;
  }
  return std::nullopt;
}

PipelineConfig parse_pipeline_config(const json& j, const fs::path& base_dir) {
  Fields f(j, "");
  PipelineConfig c;
  c.config_hash = config_hash(j);
  c.seed = f.get_or<std::uint64_t>("seed", 0);

  const json* gen = f.raw("generator");
  if (!gen) throw ConfigError("missing generator source", "generator");
  c.generator = parse_generator(*gen, base_dir);

  const json* attrs = f.raw("attributes");
  if (!attrs || !attrs->is_array() || attrs->empty()) throw ConfigError("need a non-empty attribute list", "attributes");
  std::set<std::string> names;
  for (std::size_t i = 0; i < attrs->size(); ++i) {
    c.attributes.push_back(parse_attribute((*attrs)[i], i));
    if (!names.insert(c.attributes.back().name).second) {
      throw ConfigError("duplicate attribute '" + c.attributes.back().name + "'", c.attributes.back().field + ".name");
    }
  }
  const bool text_direction =
      std::any_of(c.attributes.begin(), c.attributes.end(), [](const auto& a) { return !a.direction.empty(); });
  if (text_direction && c.attributes.size() != 1) {
    throw ConfigError("direction debiasing takes exactly one attribute", "attributes");
  }

  c.discovery = parse_discovery(f.has("discovery") ? *f.raw("discovery") : json::object());
  c.optimizer = parse_optimizer(f.has("optimizer") ? *f.raw("optimizer") : json::object());
  c.audit = parse_audit(f.has("audit") ? *f.raw("audit") : json::object(), c.attributes);

  const auto out = f.get<std::string>("output_dir");
  if (!out || out->empty()) throw ConfigError("missing output directory", "output_dir");
  c.output_dir = fs::path(*out).is_absolute() ? fs::path(*out) : base_dir / *out;
  f.finish();

  c.discovery.seed = c.seed;
  c.optimizer.seed = stage_seed(c.seed, "debias");
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  const json j = read_json(path);
  return parse_pipeline_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

}  // namespace fairstyle::cli
