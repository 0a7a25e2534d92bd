#include "fairstyle/synth/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fairstyle/core/error.hpp"
#include "fairstyle/core/tensor_io.hpp"

namespace fairstyle::synth {

using nlohmann::json;

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

double upper_tail(double h) { return boost::math::cdf(boost::math::complement(kStdNormal, h)); }

// P(Z1 >= h1, Z2 >= h2) for standard normals with correlation rho.
double orthant(double h1, double h2, double rho) {
  if (rho > 1.0 - 1e-12) return upper_tail(std::max(h1, h2));
  if (rho < -1.0 + 1e-12) return std::max(0.0, upper_tail(h1) - upper_tail(-h2));
  const double scale = std::sqrt(1.0 - rho * rho);
  auto integrand = [&](double x) {
    return boost::math::pdf(kStdNormal, x) * upper_tail((h2 - rho * x) / scale);
  };
  const double hi = std::max(h1, 0.0) + 12.0;
  if (h1 >= hi) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, h1, hi, 15, 1e-14);
}

std::size_t find_attribute(const SyntheticSpec& spec, std::string_view name) {
  for (std::size_t i = 0; i < spec.attributes.size(); ++i) {
    if (spec.attributes[i].name == name) return i;
  }
  throw ConfigError("unknown attribute '" + std::string(name) + "'", "attributes");
}

std::vector<Term> resolve_terms(const SyntheticSpec& spec, std::size_t a) {
  const auto& attr = spec.attributes[a];
  std::vector<Term> terms{{attr.causal, attr.causal_weight}};
  terms.insert(terms.end(), attr.spurious.begin(), attr.spurious.end());
  for (const auto& c : attr.couplings) {
    const auto src = find_attribute(spec, c.source);
    if (src == a) throw ConfigError("attribute '" + attr.name + "' couples to itself", "couplings");
    terms.push_back({spec.attributes[src].causal, c.weight});
  }
  return terms;
}

std::vector<ChannelId> probe_channels(const SyntheticSpec& spec) {
  std::vector<ChannelId> probes;
  std::set<ChannelId> seen;
  for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
    for (const auto& t : resolve_terms(spec, a)) {
      if (seen.insert(t.channel).second) probes.push_back(t.channel);
    }
  }
  return probes;
}

void channel_laws(const SyntheticSpec& spec, const StyleLayout& layout, std::vector<double>& means,
                  std::vector<double>& stds) {
  means.assign(layout.total_channels(), spec.default_mean);
  stds.assign(layout.total_channels(), spec.default_std);
  for (const auto& law : spec.channel_laws) {
    const auto f = layout.flat_index(law.channel);
    means[f] = law.mean;
    stds[f] = law.std;
  }
}

LayerKind kind_from(const std::string& s) {
  if (s == "conv") return LayerKind::conv;
  if (s == "trgb") return LayerKind::trgb;
  throw ConfigError("layer kind must be 'conv' or 'trgb', got '" + s + "'", "layers");
}

json term_json(const Term& t) { return {{"layer", t.channel.layer}, {"channel", t.channel.channel}, {"weight", t.weight}}; }

}  // namespace

void validate(const SyntheticSpec& spec) {
  const StyleLayout layout(spec.layers);
  if (spec.image_width == 0 || spec.image_height == 0) throw ConfigError("image dimensions must be positive", "image");
  if (!(spec.default_std >= 0.0) || !std::isfinite(spec.default_mean)) {
    throw ConfigError("default channel law is invalid", "channel_law");
  }
  if (spec.excluded_last_blocks < 0) throw ConfigError("excluded_last_blocks must be >= 0", "excluded_last_blocks");
  for (const auto& law : spec.channel_laws) {
    if (!layout.contains(law.channel)) throw ConfigError("channel law for " + to_string(law.channel) + " is outside the layout", "channel_law");
    if (!(law.std >= 0.0) || !std::isfinite(law.mean)) throw ConfigError("channel law for " + to_string(law.channel) + " is invalid", "channel_law");
  }
  std::set<std::string> names;
  const int first_excluded = layout.last_block() + 1 - spec.excluded_last_blocks;
  for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
    const auto& attr = spec.attributes[a];
    const std::string field = "attributes[" + std::to_string(a) + "]";
    if (attr.name.empty()) throw ConfigError("attribute needs a name", field + ".name");
    if (!names.insert(attr.name).second) throw ConfigError("duplicate attribute '" + attr.name + "'", field + ".name");
    if (!layout.contains(attr.causal)) throw ConfigError("causal channel " + to_string(attr.causal) + " is outside the layout", field + ".causal");
    const auto& info = layout.layer(attr.causal.layer);
    if (info.kind == LayerKind::trgb) throw ConfigError("causal channel of '" + attr.name + "' is on a tRGB layer", field + ".causal");
    if (info.block >= first_excluded) {
      throw ConfigError("causal channel of '" + attr.name + "' lies in one of the last " +
                            std::to_string(spec.excluded_last_blocks) + " blocks",
                        field + ".causal");
    }
    if (!(attr.base_rate > 0.0 && attr.base_rate < 1.0)) throw ConfigError("base rate must lie in (0, 1)", field + ".base_rate");
    if (!(attr.slope > 0.0) || !std::isfinite(attr.slope)) throw ConfigError("slope must be positive", field + ".slope");
    if (attr.causal_weight == 0.0 || !std::isfinite(attr.causal_weight)) throw ConfigError("causal weight must be non-zero", field + ".causal_weight");
    std::set<ChannelId> channels;
    for (const auto& t : resolve_terms(spec, a)) {
      if (!layout.contains(t.channel)) throw ConfigError("readout channel " + to_string(t.channel) + " is outside the layout", field + ".spurious");
      if (!channels.insert(t.channel).second) throw ConfigError("readout of '" + attr.name + "' uses channel " + to_string(t.channel) + " twice", field + ".spurious");
    }
  }
  for (const auto& attr : spec.attributes) {
    if (attr.prompts && (attr.prompts->positive.empty() || attr.prompts->negative.empty() ||
                         attr.prompts->positive == attr.prompts->negative)) {
      throw ConfigError("prompts of '" + attr.name + "' must be non-empty and distinct", "prompts");
    }
  }
  const auto probes = probe_channels(spec);
  if (probes.size() > spec.image_width * spec.image_height) {
    throw ConfigError("image has " + std::to_string(spec.image_width * spec.image_height) + " pixels but " +
                          std::to_string(probes.size()) + " channels are probed",
                      "image");
  }
  const Oracle oracle(spec);
  for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
    if (!(oracle.readout_std(a) > 0.0)) {
      throw ConfigError("readout of '" + spec.attributes[a].name + "' has zero variance",
                        "attributes[" + std::to_string(a) + "]");
    }
  }
}

json to_json(const SyntheticSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"width", l.width}, {"kind", l.kind == LayerKind::conv ? "conv" : "trgb"}, {"block", l.block}});
  }
  json overrides = json::array();
  for (const auto& law : spec.channel_laws) {
    overrides.push_back({{"layer", law.channel.layer}, {"channel", law.channel.channel}, {"mean", law.mean}, {"std", law.std}});
  }
  json attrs = json::array();
  for (const auto& a : spec.attributes) {
    json spurious = json::array();
    for (const auto& t : a.spurious) spurious.push_back(term_json(t));
    json couplings = json::array();
    for (const auto& c : a.couplings) couplings.push_back({{"source", c.source}, {"weight", c.weight}});
    json entry = {{"name", a.name},
                  {"causal", fairstyle::to_json(a.causal)},
                  {"causal_weight", a.causal_weight},
                  {"spurious", spurious},
                  {"couplings", couplings},
                  {"slope", a.slope},
                  {"base_rate", a.base_rate}};
    if (a.prompts) entry["prompts"] = {{"positive", a.prompts->positive}, {"negative", a.prompts->negative}};
    attrs.push_back(entry);
  }
  return {{"layers", layers},
          {"image", {{"width", spec.image_width}, {"height", spec.image_height}}},
          {"channel_law", {{"mean", spec.default_mean}, {"std", spec.default_std}, {"overrides", overrides}}},
          {"attributes", attrs},
          {"excluded_last_blocks", spec.excluded_last_blocks}};
}

SyntheticSpec spec_from_json(const json& j) {
  SyntheticSpec spec;
  try {
    if (j.contains("layout")) {
      const auto& l = j.at("layout");
      spec.layers = stylegan_like_layout(l.at("blocks").get<int>(), l.at("width").get<std::size_t>());
    } else {
      for (const auto& l : j.at("layers")) {
        spec.layers.push_back({l.at("width").get<std::size_t>(), kind_from(l.value("kind", std::string("conv"))),
                               l.at("block").get<int>()});
      }
    }
    if (j.contains("image")) {
      spec.image_width = j["image"].value("width", spec.image_width);
      spec.image_height = j["image"].value("height", spec.image_height);
    }
    if (j.contains("channel_law")) {
      const auto& law = j.at("channel_law");
      spec.default_mean = law.value("mean", 0.0);
      spec.default_std = law.value("std", 1.0);
      for (const auto& o : law.value("overrides", json::array())) {
        spec.channel_laws.push_back({channel_from_json(o), o.value("mean", 0.0), o.value("std", 1.0)});
      }
    }
    spec.excluded_last_blocks = j.value("excluded_last_blocks", 4);
    for (const auto& a : j.at("attributes")) {
      PlantedAttribute attr;
      attr.name = a.at("name").get<std::string>();
      attr.causal = channel_from_json(a.at("causal"));
      attr.causal_weight = a.value("causal_weight", 1.0);
      attr.slope = a.value("slope", 4.0);
      attr.base_rate = a.value("base_rate", 0.5);
      for (const auto& t : a.value("spurious", json::array())) {
        attr.spurious.push_back({channel_from_json(t), t.at("weight").get<double>()});
      }
      for (const auto& c : a.value("couplings", json::array())) {
        attr.couplings.push_back({c.at("source").get<std::string>(), c.at("weight").get<double>()});
      }
      if (a.contains("prompts")) {
        attr.prompts = PromptText{a["prompts"].at("positive").get<std::string>(), a["prompts"].at("negative").get<std::string>()};
      }
      spec.attributes.push_back(std::move(attr));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed synthetic spec: ") + e.what(), "spec");
  }
  validate(spec);
  return spec;
}

// --- generator ---------------------------------------------------------------

SyntheticGenerator::SyntheticGenerator(std::shared_ptr<const StyleLayout> layout, std::vector<double> means,
                                       std::vector<double> stds, std::vector<ChannelId> probes, std::size_t width,
                                       std::size_t height)
    : layout_(std::move(layout)),
      means_(std::move(means)),
      stds_(std::move(stds)),
      probes_(std::move(probes)),
      width_(width),
      height_(height) {
  for (const auto& p : probes_) probe_flat_.push_back(layout_->flat_index(p));
}

StyleCode SyntheticGenerator::sample_style(std::uint64_t latent_seed) const {
  std::mt19937_64 rng(latent_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(layout_->total_channels());
  for (std::size_t f = 0; f < values.size(); ++f) values[f] = means_[f] + stds_[f] * normal(rng);
  return StyleCode(layout_, std::move(values));
}

Image SyntheticGenerator::render(const StyleCode& code) const {
  if (!(code.layout() == *layout_)) throw AdapterError("style code layout does not match the generator");
  Image img{width_, height_, std::vector<float>(width_ * height_, 0.0f)};
  const auto values = code.values();
  for (std::size_t i = 0; i < probe_flat_.size(); ++i) img.pixels[i] = static_cast<float>(values[probe_flat_[i]]);
  const std::size_t texture = img.pixels.size() - probe_flat_.size();
  if (texture == 0) return img;
  std::vector<double> acc(texture, 0.0);
  std::vector<std::size_t> count(texture, 0);
  for (std::size_t f = 0; f < values.size(); ++f) {
    acc[f % texture] += values[f];
    ++count[f % texture];
  }
  for (std::size_t t = 0; t < texture; ++t) {
    const double n = count[t] == 0 ? 1.0 : static_cast<double>(count[t]);
    img.pixels[probe_flat_.size() + t] = static_cast<float>(std::tanh(acc[t] / std::sqrt(n)));
  }
  return img;
}

std::size_t SyntheticGenerator::pixel_of(const ChannelId& id) const {
  const auto it = std::find(probes_.begin(), probes_.end(), id);
  if (it == probes_.end()) throw AddressError("channel " + to_string(id) + " is not probed by the synthetic generator");
  return static_cast<std::size_t>(std::distance(probes_.begin(), it));
}

// --- classifier --------------------------------------------------------------

SyntheticClassifier::SyntheticClassifier(std::string attribute, std::vector<std::pair<std::size_t, double>> pixel_weights,
                                         double slope, double threshold, std::size_t pixel_count)
    : ClassifierAdapter(std::move(attribute)),
      pixel_weights_(std::move(pixel_weights)),
      slope_(slope),
      readout_threshold_(threshold),
      pixel_count_(pixel_count) {}

double SyntheticClassifier::readout(const Image& image) const {
  if (image.pixels.size() != pixel_count_) {
    throw AdapterError("image has " + std::to_string(image.pixels.size()) + " pixels, classifier expects " +
                       std::to_string(pixel_count_));
  }
  double v = 0.0;
  for (const auto& [px, w] : pixel_weights_) v += w * static_cast<double>(image.pixels[px]);
  return v;
}

double SyntheticClassifier::score(const Image& image) const {
  return 1.0 / (1.0 + std::exp(-slope_ * (readout(image) - readout_threshold_)));
}

// --- oracle ------------------------------------------------------------------

Oracle::Oracle(const SyntheticSpec& spec) : spec_(spec), layout_(std::make_shared<StyleLayout>(spec.layers)) {
  channel_laws(spec_, *layout_, means_, stds_);
  for (std::size_t a = 0; a < spec_.attributes.size(); ++a) {
    Readout r{resolve_terms(spec_, a), spec_.attributes[a].slope, 0.0};
    readouts_.push_back(std::move(r));
    const double sd = readout_std(a);
    const double q = sd > 0.0 ? boost::math::quantile(boost::math::complement(kStdNormal, spec_.attributes[a].base_rate)) : 0.0;
    readouts_.back().threshold = readout_mean(a) + sd * q;
  }
}

std::size_t Oracle::attribute_index(std::string_view name) const { return find_attribute(spec_, name); }

double Oracle::channel_mean(const ChannelId& id) const { return means_[layout_->flat_index(id)]; }
double Oracle::channel_std(const ChannelId& id) const { return stds_[layout_->flat_index(id)]; }

double Oracle::base_rate(std::size_t attribute) const { return spec_.attributes.at(attribute).base_rate; }

double Oracle::readout_mean(std::size_t attribute) const {
  double m = 0.0;
  for (const auto& t : readouts_.at(attribute).terms) m += t.weight * channel_mean(t.channel);
  return m;
}

double Oracle::readout_std(std::size_t attribute) const {
  double v = 0.0;
  for (const auto& t : readouts_.at(attribute).terms) v += t.weight * t.weight * channel_std(t.channel) * channel_std(t.channel);
  return std::sqrt(v);
}

double Oracle::balancing_offset(std::size_t attribute) const {
  return (threshold(attribute) - readout_mean(attribute)) / readouts_.at(attribute).terms.front().weight;
}

double Oracle::label_rate_with_offset(std::size_t attribute, double offset) const {
  const double shift = readouts_.at(attribute).terms.front().weight * offset;
  return upper_tail((threshold(attribute) - readout_mean(attribute) - shift) / readout_std(attribute));
}

double Oracle::cross_covariance(std::size_t a, std::size_t b) const {
  double cov = 0.0;
  for (const auto& ta : readouts_.at(a).terms) {
    for (const auto& tb : readouts_.at(b).terms) {
      if (ta.channel == tb.channel) cov += ta.weight * tb.weight * channel_std(ta.channel) * channel_std(ta.channel);
    }
  }
  return cov;
}

std::array<double, 4> Oracle::joint_cells(std::size_t a, std::size_t b) const {
  const double sa = readout_std(a);
  const double sb = readout_std(b);
  const double rho = cross_covariance(a, b) / (sa * sb);
  const double ha = (threshold(a) - readout_mean(a)) / sa;
  const double hb = (threshold(b) - readout_mean(b)) / sb;
  const double p11 = orthant(ha, hb, rho);
  const double pa = upper_tail(ha);
  const double pb = upper_tail(hb);
  return {1.0 - pa - pb + p11, pb - p11, pa - p11, p11};
}

CoupledBias Oracle::decorrelating_tensor(std::size_t a, std::size_t b, const ChannelStats& stats_a,
                                         const ChannelStats& stats_b) const {
  const auto& ra = readouts_.at(a);
  const auto& rb = readouts_.at(b);
  const ChannelId ca = ra.terms.front().channel;
  const ChannelId cb = rb.terms.front().channel;
  for (const auto& t : ra.terms) {
    if (t.channel == cb) throw ConfigError("attribute a reads b's causal channel; no closed-form decorrelation");
  }
  double g = 0.0;  // weight of a's causal channel inside b's readout
  for (const auto& t : rb.terms) {
    if (t.channel == ca) g = t.weight;
  }
  const double wb = rb.terms.front().weight;
  const double offset_a = balancing_offset(a);

  CoupledBias out = CoupledBias::zeros({ca, cb}, {stats_a, stats_b});
  const auto p01 = CoupledBias::pair_index(0, 1, 2);  // bias on a, driven by b
  const auto p10 = CoupledBias::pair_index(1, 0, 2);  // bias on b, driven by a
  out.x[p01] = 0.0;
  out.y[p01] = offset_a;
  // cancel b's dependence on a's (edited) causal channel, then recentre b
  out.x[p10] = -g * stats_a.std() / wb;
  out.y[p10] = (threshold(b) - readout_mean(b) + g * channel_mean(ca) - g * offset_a - g * stats_a.mean()) / wb;
  return out;
}

// --- model -------------------------------------------------------------------

const ClassifierAdapter& SyntheticModel::classifier(std::string_view name) const {
  for (const auto& c : classifiers) {
    if (c->attribute() == name) return *c;
  }
  throw ConfigError("synthetic model has no attribute '" + std::string(name) + "'", "attributes");
}

std::vector<const ClassifierAdapter*> SyntheticModel::classifier_set() const {
  std::vector<const ClassifierAdapter*> out;
  for (const auto& c : classifiers) out.push_back(c.get());
  return out;
}

std::vector<const ClassifierAdapter*> SyntheticModel::classifier_set(const std::vector<std::string>& names) const {
  std::vector<const ClassifierAdapter*> out;
  for (const auto& n : names) out.push_back(&classifier(n));
  return out;
}

SyntheticModel make_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  auto layout = std::make_shared<const StyleLayout>(spec.layers);
  std::vector<double> means, stds;
  channel_laws(spec, *layout, means, stds);
  auto probes = probe_channels(spec);
  auto generator = std::make_shared<const SyntheticGenerator>(layout, means, stds, probes, spec.image_width, spec.image_height);
  auto oracle = std::make_shared<const Oracle>(spec);

  SyntheticModel model{spec, generator, {}, oracle};
  for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
    const auto& r = oracle->readout(a);
    std::vector<std::pair<std::size_t, double>> weights;
    for (const auto& t : r.terms) weights.emplace_back(generator->pixel_of(t.channel), t.weight);
    model.classifiers.push_back(std::make_shared<const SyntheticClassifier>(
        spec.attributes[a].name, std::move(weights), r.slope, r.threshold, spec.image_width * spec.image_height));
  }
  return model;
}

// --- presets -----------------------------------------------------------------

std::vector<LayerInfo> stylegan_like_layout(int blocks, std::size_t width) {
  if (blocks < 1) throw ConfigError("layout needs at least one block", "layout");
  std::vector<LayerInfo> layers{{width, LayerKind::conv, 0}, {width, LayerKind::trgb, 0}};
  for (int b = 1; b < blocks; ++b) {
    layers.push_back({width, LayerKind::conv, b});
    layers.push_back({width, LayerKind::conv, b});
    layers.push_back({width, LayerKind::trgb, b});
  }
  return layers;
}

SyntheticSpec biased_single_spec(double base_rate, int blocks, std::size_t width) {
  SyntheticSpec spec;
  spec.layers = stylegan_like_layout(blocks, width);
  PlantedAttribute attr;
  attr.name = "attr";
  attr.causal = {2, 5};
  attr.spurious = {{{3, 1}, 0.15}, {{5, 7}, -0.1}};
  attr.base_rate = base_rate;
  attr.prompts = PromptText{"a photo with the attribute", "a photo without the attribute"};
  spec.attributes.push_back(attr);
  validate(spec);
  return spec;
}

SyntheticSpec independent_pair_spec(double base_a, double base_b, int blocks, std::size_t width) {
  SyntheticSpec spec;
  spec.layers = stylegan_like_layout(blocks, width);
  PlantedAttribute a;
  a.name = "attr_a";
  a.causal = {2, 5};
  a.base_rate = base_a;
  PlantedAttribute b;
  b.name = "attr_b";
  b.causal = {5, 11};
  b.base_rate = base_b;
  spec.attributes = {a, b};
  validate(spec);
  return spec;
}

SyntheticSpec correlated_pair_spec(const std::array<double, 4>& cells, int blocks, std::size_t width) {
  double total = 0.0;
  for (double c : cells) {
    if (!(c > 0.0)) throw ConfigError("joint cells must be positive", "cells");
    total += c;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("joint cells must sum to 1", "cells");

  SyntheticSpec spec = independent_pair_spec(cells[2] + cells[3], cells[1] + cells[3], blocks, width);
  spec.attributes[1].couplings = {{"attr_a", 0.0}};
  auto p11 = [&](double g) {
    spec.attributes[1].couplings[0].weight = g;
    return Oracle(spec).joint_cells(0, 1)[3];
  };
  double lo = -50.0, hi = 50.0;
  if (!(p11(lo) <= cells[3] && cells[3] <= p11(hi))) {
    throw ConfigError("joint cells are not reachable with a single coupling", "cells");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p11(mid) < cells[3] ? lo : hi) = mid;
  }
  spec.attributes[1].couplings[0].weight = 0.5 * (lo + hi);
  validate(spec);
  return spec;
}

SyntheticSpec random_discovery_spec(std::uint64_t seed, std::size_t width) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  SyntheticSpec spec;
  const int blocks = 7 + static_cast<int>(pick(3));
  spec.layers = stylegan_like_layout(blocks, width);
  const StyleLayout layout(spec.layers);
  const int first_excluded = layout.last_block() + 1 - spec.excluded_last_blocks;

  std::vector<std::size_t> candidates;
  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    if (layout.layer(l).kind == LayerKind::conv && layout.layer(l).block < first_excluded) candidates.push_back(l);
  }
  PlantedAttribute attr;
  attr.name = "planted";
  attr.causal = {candidates[pick(candidates.size())], pick(width)};
  attr.causal_weight = uniform(0.8, 1.5);
  attr.slope = 2.0;
  attr.base_rate = uniform(0.15, 0.85);

  std::set<ChannelId> used{attr.causal};
  const std::size_t spurious = 3 + pick(6);
  while (attr.spurious.size() < spurious) {
    const ChannelId id = layout.channel_at(pick(layout.total_channels()));
    if (!used.insert(id).second) continue;
    const double magnitude = uniform(0.05, 1.0 / 3.0) * attr.causal_weight;
    attr.spurious.push_back({id, pick(2) == 0 ? magnitude : -magnitude});
  }
  spec.attributes.push_back(attr);
  validate(spec);
  return spec;
}

}  // namespace fairstyle::synth
