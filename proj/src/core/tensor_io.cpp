#include "fairstyle/core/tensor_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fairstyle/core/error.hpp"
#include "fairstyle/core/hash.hpp"

namespace fairstyle {

using nlohmann::json;

namespace {

json stats_json(const ChannelStats& s) {
  return {{"layer", s.channel().layer},
          {"channel", s.channel().channel},
          {"mean", s.mean()},
          {"std", s.std()},
          {"sample_count", s.sample_count()}};
}

json tensor_body(const FairStyleTensor& tensor) {
  json j;
  j["variant"] = std::string(variant_name(tensor));
  json targets = json::array();
  for (const auto& id : support(tensor)) targets.push_back(to_json(id));
  j["targets"] = targets;
  json stats = json::array();
  if (const auto* s = std::get_if<ScalarBias>(&tensor)) {
    j["parameters"] = {{"c", s->value}};
  } else if (const auto* c = std::get_if<CoupledBias>(&tensor)) {
    json pairs = json::array();
    const auto m_count = c->targets.size();
    for (std::size_t m = 0; m < m_count; ++m) {
      for (std::size_t k = 0; k < m_count; ++k) {
        if (k == m) continue;
        const auto p = CoupledBias::pair_index(m, k, m_count);
        pairs.push_back({{"m", m}, {"k", k}, {"x", c->x.at(p)}, {"y", c->y.at(p)}});
      }
    }
    j["parameters"] = {{"pairs", pairs}};
    for (const auto& s : c->stats) stats.push_back(stats_json(s));
  } else {
    const auto& d = std::get<DirectionBias>(tensor);
    json dir = json::array();
    for (const auto& [id, w] : d.direction) dir.push_back({{"layer", id.layer}, {"channel", id.channel}, {"weight", w}});
    j["parameters"] = {{"alpha", d.alpha}, {"direction", dir}};
  }
  j["channel_stats"] = stats;
  return j;
}

FairStyleTensor tensor_from_body(const json& j) {
  const auto variant = j.at("variant").get<std::string>();
  const auto& params = j.at("parameters");
  if (variant == "scalar") {
    const auto& targets = j.at("targets");
    if (targets.size() != 1) throw ConfigError("scalar tensor must have exactly one target");
    return ScalarBias{channel_from_json(targets.at(0)), params.at("c").get<double>()};
  }
  if (variant == "affine-coupled") {
    std::vector<ChannelId> targets;
    for (const auto& t : j.at("targets")) targets.push_back(channel_from_json(t));
    std::vector<ChannelStats> stats;
    for (const auto& s : j.at("channel_stats")) {
      stats.emplace_back(channel_from_json(s), s.at("mean").get<double>(), s.at("std").get<double>(),
                         s.at("sample_count").get<std::size_t>());
    }
    CoupledBias out = CoupledBias::zeros(std::move(targets), std::move(stats));
    const auto m_count = out.targets.size();
    const auto& pairs = params.at("pairs");
    if (m_count < 2 || pairs.size() != CoupledBias::pair_count(m_count)) {
      throw ConfigError("affine-coupled tensor has the wrong number of parameters");
    }
    for (const auto& p : pairs) {
      const auto m = p.at("m").get<std::size_t>();
      const auto k = p.at("k").get<std::size_t>();
      if (m >= m_count || k >= m_count || m == k) throw ConfigError("invalid coupling pair index");
      const auto idx = CoupledBias::pair_index(m, k, m_count);
      out.x[idx] = p.at("x").get<double>();
      out.y[idx] = p.at("y").get<double>();
    }
    return out;
  }
  if (variant == "direction-scaled") {
    DirectionBias out;
    out.alpha = params.at("alpha").get<double>();
    for (const auto& d : params.at("direction")) out.direction.emplace_back(channel_from_json(d), d.at("weight").get<double>());
    return out;
  }
  throw ConfigError("unknown tensor variant '" + variant + "'", "variant");
}

}  // namespace

json to_json(const ChannelId& id) { return {{"layer", id.layer}, {"channel", id.channel}}; }

ChannelId channel_from_json(const json& j) {
  return {j.at("layer").get<std::size_t>(), j.at("channel").get<std::size_t>()};
}

json to_json(const TensorDocument& doc) {
  json j = tensor_body(doc.tensor);
  j["generator_fingerprint"] = doc.generator_fingerprint;
  j["attribute_names"] = doc.attribute_names;
  j["created_at"] = doc.created_at;
  j["provenance"] = doc.provenance;
  return j;
}

TensorDocument tensor_from_json(const json& j) {
  try {
    TensorDocument doc{tensor_from_body(j), j.at("generator_fingerprint").get<std::string>(), {}, {}, json::object()};
    if (j.contains("attribute_names")) doc.attribute_names = j.at("attribute_names").get<std::vector<std::string>>();
    if (j.contains("created_at")) doc.created_at = j.at("created_at").get<std::string>();
    if (j.contains("provenance")) doc.provenance = j.at("provenance");
    return doc;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed tensor document: ") + e.what());
  }
}

std::string tensor_hash(const FairStyleTensor& tensor) { return to_hex(fnv1a(tensor_body(tensor).dump())); }

void save_tensor(const std::filesystem::path& path, const TensorDocument& doc) { write_json(path, to_json(doc)); }

TensorDocument load_tensor(const std::filesystem::path& path, const StyleLayout& layout) {
  TensorDocument doc = tensor_from_json(read_json(path));
  if (doc.generator_fingerprint != layout.fingerprint()) {
    throw FingerprintMismatch("tensor " + path.string() + " was fitted for generator " + doc.generator_fingerprint +
                              ", this generator is " + layout.fingerprint());
  }
  validate(doc.tensor, layout);
  return doc;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

}  // namespace fairstyle
