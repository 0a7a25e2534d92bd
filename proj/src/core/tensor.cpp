#include "fairstyle/core/tensor.hpp"

#include <algorithm>
#include <set>

#include "fairstyle/core/error.hpp"
#include "fairstyle/debias/coupling.hpp"

namespace fairstyle {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_editable(const ChannelId& id, const StyleLayout& layout) {
  layout.check(id);
  if (layout.layer(id.layer).kind == LayerKind::trgb) {
    throw ConfigError("channel " + to_string(id) + " is on a tRGB layer; tRGB styles never carry bias");
  }
}

}  // namespace

std::size_t CoupledBias::pair_index(std::size_t m, std::size_t k, std::size_t targets) {
  return m * (targets - 1) + (k < m ? k : k - 1);
}

CoupledBias CoupledBias::zeros(std::vector<ChannelId> targets, std::vector<ChannelStats> stats) {
  CoupledBias out;
  const auto pairs = targets.size() < 2 ? 0 : pair_count(targets.size());
  out.targets = std::move(targets);
  out.stats = std::move(stats);
  out.x.assign(pairs, 0.0);
  out.y.assign(pairs, 0.0);
  return out;
}

std::string_view variant_name(const FairStyleTensor& tensor) {
  return std::visit(overloaded{[](const ScalarBias&) { return std::string_view("scalar"); },
                               [](const CoupledBias&) { return std::string_view("affine-coupled"); },
                               [](const DirectionBias&) { return std::string_view("direction-scaled"); }},
                    tensor);
}

void validate(const FairStyleTensor& tensor, const StyleLayout& layout) {
  std::visit(overloaded{
                 [&](const ScalarBias& t) { check_editable(t.target, layout); },
                 [&](const CoupledBias& t) {
                   const auto m = t.targets.size();
                   if (m < 2) throw ConfigError("affine-coupled tensor needs at least two targets");
                   std::set<ChannelId> seen;
                   for (const auto& id : t.targets) {
                     check_editable(id, layout);
                     if (!seen.insert(id).second) throw ConfigError("duplicate target " + to_string(id));
                   }
                   if (t.x.size() != CoupledBias::pair_count(m) || t.y.size() != CoupledBias::pair_count(m)) {
                     throw ConfigError("affine-coupled tensor over " + std::to_string(m) + " targets needs " +
                                       std::to_string(CoupledBias::parameter_count(m)) + " parameters");
                   }
                   if (t.stats.size() != m) throw ConfigError("affine-coupled tensor is missing channel statistics");
                   for (std::size_t k = 0; k < m; ++k) {
                     if (t.stats[k].channel() != t.targets[k]) {
                       throw ConfigError("channel statistics do not match target " + to_string(t.targets[k]));
                     }
                   }
                 },
                 [&](const DirectionBias& t) {
                   std::set<ChannelId> seen;
                   for (const auto& [id, w] : t.direction) {
                     check_editable(id, layout);
                     if (!seen.insert(id).second) throw ConfigError("duplicate direction channel " + to_string(id));
                   }
                 },
             },
             tensor);
}

SparseBias bias_for(const StyleCode& code, const FairStyleTensor& tensor) {
  return std::visit(overloaded{
                        [](const ScalarBias& t) { return SparseBias{{t.target, t.value}}; },
                        [&](const CoupledBias& t) { return debias::multi_bias(code, t.targets, t.x, t.y, t.stats); },
                        [](const DirectionBias& t) {
                          SparseBias out;
                          out.reserve(t.direction.size());
                          for (const auto& [id, w] : t.direction) out.emplace_back(id, t.alpha * w);
                          return out;
                        },
                    },
                    tensor);
}

StyleCode apply_fairstyle(const StyleCode& code, const FairStyleTensor& tensor) {
  validate(tensor, code.layout());
  StyleCode out = code;
  for (const auto& [id, b] : bias_for(code, tensor)) {
    if (b != 0.0) out.at(id) += b;
  }
  return out;
}

std::vector<ChannelId> support(const FairStyleTensor& tensor) {
  return std::visit(overloaded{
                        [](const ScalarBias& t) { return std::vector<ChannelId>{t.target}; },
                        [](const CoupledBias& t) { return t.targets; },
                        [](const DirectionBias& t) {
                          std::vector<ChannelId> out;
                          for (const auto& [id, w] : t.direction) out.push_back(id);
                          return out;
                        },
                    },
                    tensor);
}

}  // namespace fairstyle
