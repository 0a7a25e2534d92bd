#include "fairstyle/debias/coupling.hpp"

#include "fairstyle/core/error.hpp"

namespace fairstyle::debias {

double normalized(const StyleCode& code, const ChannelStats& stats) {
  return (code.at(stats.channel()) - stats.mean()) / stats.std();
}

SparseBias pair_bias(const StyleCode& code, const std::array<ChannelId, 2>& targets,
                     const PairParameters& params, const std::array<ChannelStats, 2>& stats) {
  if (stats[0].channel() != targets[0] || stats[1].channel() != targets[1]) {
    throw ConfigError("pair statistics do not match the target channels");
  }
  const double z1 = normalized(code, stats[0]);
  const double z2 = normalized(code, stats[1]);
  return {{targets[0], params.x2 * z2 + params.y2}, {targets[1], params.x1 * z1 + params.y1}};
}

SparseBias multi_bias(const StyleCode& code, std::span<const ChannelId> targets, std::span<const double> x,
                      std::span<const double> y, std::span<const ChannelStats> stats) {
  const std::size_t m_count = targets.size();
  if (m_count < 2) throw ConfigError("coupled bias needs at least two targets");
  const std::size_t pairs = CoupledBias::pair_count(m_count);
  if (x.size() != pairs || y.size() != pairs) {
    throw ConfigError("coupled bias over " + std::to_string(m_count) + " targets needs " +
                      std::to_string(CoupledBias::parameter_count(m_count)) + " parameters, got " +
                      std::to_string(x.size() + y.size()));
  }
  if (stats.size() != m_count) {
    throw ConfigError("coupled bias is missing channel statistics (" + std::to_string(stats.size()) + " of " +
                      std::to_string(m_count) + ")");
  }
  std::vector<double> z(m_count);
  for (std::size_t k = 0; k < m_count; ++k) {
    if (stats[k].channel() != targets[k]) {
      throw ConfigError("statistics for target " + std::to_string(k) + " describe channel " +
                        to_string(stats[k].channel()) + ", expected " + to_string(targets[k]));
    }
    z[k] = normalized(code, stats[k]);
  }

  SparseBias out;
  out.reserve(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    double b = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < m_count; ++k) {
      if (k == m) continue;
      const std::size_t p = CoupledBias::pair_index(m, k, m_count);
      const double term = x[p] * z[k] + y[p];
      b = first ? term : b + term;
      first = false;
    }
    out.emplace_back(targets[m], b);
  }
  return out;
}

void to_coupled(const PairParameters& params, std::span<double, 2> x, std::span<double, 2> y) {
  // pair (0,1) drives target 0 from target 1; pair (1,0) the reverse
  x[0] = params.x2;
  y[0] = params.y2;
  x[1] = params.x1;
  y[1] = params.y1;
}

}  // namespace fairstyle::debias
