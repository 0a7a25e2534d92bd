#pragma once

#include <array>
#include <span>

#include "fairstyle/core/style.hpp"
#include "fairstyle/core/tensor.hpp"

namespace fairstyle::debias {

/// Learnable values of the two-target coupling. x1/y1 drive the bias of the
/// second target from the first target's value; x2/y2 drive the first
/// target's bias from the second's.
struct PairParameters {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

/// (s - mean) / std for the channel the stats describe.
double normalized(const StyleCode& code, const ChannelStats& stats);

/// Two-target bias:
///   b[t1] = x2 * z2 + y2
///   b[t2] = x1 * z1 + y1
/// with z the sample's normalized value at each target.
SparseBias pair_bias(const StyleCode& code, const std::array<ChannelId, 2>& targets,
                     const PairParameters& params, const std::array<ChannelStats, 2>& stats);

/// M-target generalization: b[t_m] = sum over k != m of x(m,k) * z_k + y(m,k).
/// `x` and `y` each hold M*(M-1) values in CoupledBias::pair_index order.
/// Throws ConfigError for M < 2, a wrong parameter count, or stats that do
/// not match the targets.
SparseBias multi_bias(const StyleCode& code, std::span<const ChannelId> targets, std::span<const double> x,
                      std::span<const double> y, std::span<const ChannelStats> stats);

/// Pair parameters laid out as a two-target CoupledBias parameter block.
void to_coupled(const PairParameters& params, std::span<double, 2> x, std::span<double, 2> y);

}  // namespace fairstyle::debias
