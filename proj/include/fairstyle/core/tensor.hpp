#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fairstyle/core/style.hpp"

namespace fairstyle {

/// Single-channel bias: b[target] = value, zero elsewhere.
struct ScalarBias {
  ChannelId target;
  double value = 0.0;
};

/// Cross-attribute affine coupling over M target channels. The bias at target
/// m is a sum over every other target k of x(m,k) * z_k + y(m,k), where z_k is
/// the sample's normalized value at target k.
///
/// Parameters are stored for the ordered pairs (m, k), k != m, m-major with k
/// ascending, giving 2*M*(M-1) learnable values in total.
struct CoupledBias {
  std::vector<ChannelId> targets;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<ChannelStats> stats;  // one per target, same order

  static std::size_t pair_count(std::size_t m) { return m * (m - 1); }
  static std::size_t parameter_count(std::size_t m) { return 2 * pair_count(m); }
  static std::size_t pair_index(std::size_t m, std::size_t k, std::size_t targets);

  /// All-zero coupling for the given targets.
  static CoupledBias zeros(std::vector<ChannelId> targets, std::vector<ChannelStats> stats);
};

/// alpha times a sparse style-space direction.
struct DirectionBias {
  std::vector<std::pair<ChannelId, double>> direction;
  double alpha = 0.0;
};

using FairStyleTensor = std::variant<ScalarBias, CoupledBias, DirectionBias>;

std::string_view variant_name(const FairStyleTensor& tensor);

using SparseBias = std::vector<std::pair<ChannelId, double>>;

/// Checks addresses, tRGB exclusion, parameter cardinality and stats
/// coverage against a layout. Throws AddressError or ConfigError.
void validate(const FairStyleTensor& tensor, const StyleLayout& layout);

/// Per-channel bias this tensor adds to `code`. Coupled tensors depend on the
/// sample; the other variants do not.
SparseBias bias_for(const StyleCode& code, const FairStyleTensor& tensor);

/// s' = s + b. The input is not modified; zero entries are skipped so an
/// all-zero tensor returns an exact copy.
StyleCode apply_fairstyle(const StyleCode& code, const FairStyleTensor& tensor);

/// Channels the tensor may touch.
std::vector<ChannelId> support(const FairStyleTensor& tensor);

}  // namespace fairstyle
