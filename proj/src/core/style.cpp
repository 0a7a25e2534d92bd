#include "fairstyle/core/style.hpp"

#include <algorithm>
#include <cmath>

#include "fairstyle/core/error.hpp"
#include "fairstyle/core/hash.hpp"

namespace fairstyle {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::address: return "address";
    case ErrorKind::config: return "config";
    case ErrorKind::degenerate: return "degenerate_channel";
    case ErrorKind::fingerprint: return "fingerprint_mismatch";
    case ErrorKind::adapter: return "adapter";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::string to_string(const ChannelId& id) {
  return "(" + std::to_string(id.layer) + "," + std::to_string(id.channel) + ")";
}

StyleLayout::StyleLayout(std::vector<LayerInfo> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("style layout has no layers");
  offsets_.reserve(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].width == 0) throw ConfigError("style layer " + std::to_string(i) + " has zero width");
    if (layers_[i].block < 0) throw ConfigError("style layer " + std::to_string(i) + " has a negative block");
    offsets_.push_back(total_);
    total_ += layers_[i].width;
    last_block_ = std::max(last_block_, layers_[i].block);
  }
}

bool StyleLayout::contains(const ChannelId& id) const {
  return id.layer < layers_.size() && id.channel < layers_[id.layer].width;
}

void StyleLayout::check(const ChannelId& id) const {
  if (!contains(id)) {
    throw AddressError("channel " + to_string(id) + " is outside the style layout (" +
                       std::to_string(layers_.size()) + " layers)");
  }
}

std::size_t StyleLayout::flat_index(const ChannelId& id) const {
  check(id);
  return offsets_[id.layer] + id.channel;
}

ChannelId StyleLayout::channel_at(std::size_t flat) const {
  if (flat >= total_) throw AddressError("flat channel index " + std::to_string(flat) + " out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
  const auto layer = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
  return {layer, flat - offsets_[layer]};
}

std::string StyleLayout::fingerprint() const {
  Fnv1a h;
  h.update_u64(layers_.size());
  for (const auto& l : layers_) h.update_u64(l.width);
  return "L" + std::to_string(layers_.size()) + "-" + to_hex(h.digest());
}

StyleCode::StyleCode(std::shared_ptr<const StyleLayout> layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_) throw ConfigError("style code without a layout");
  if (values_.size() != layout_->total_channels()) {
    throw ConfigError("style code has " + std::to_string(values_.size()) + " values, layout expects " +
                      std::to_string(layout_->total_channels()));
  }
}

StyleCode StyleCode::zeros(std::shared_ptr<const StyleLayout> layout) {
  const auto n = layout->total_channels();
  return StyleCode(std::move(layout), std::vector<double>(n, 0.0));
}

std::span<const double> StyleCode::layer(std::size_t i) const {
  return std::span<const double>(values_).subspan(layout_->offset(i), layout_->layer(i).width);
}

std::span<double> StyleCode::layer(std::size_t i) {
  return std::span<double>(values_).subspan(layout_->offset(i), layout_->layer(i).width);
}

ChannelStats::ChannelStats(ChannelId channel, double mean, double std, std::size_t sample_count)
    : channel_(channel), mean_(mean), std_(std), sample_count_(sample_count) {
  if (sample_count_ < 2) throw ConfigError("channel statistics need at least two samples");
  if (!std::isfinite(mean_) || !std::isfinite(std_)) {
    throw DegenerateChannelError("channel " + to_string(channel_) + " has non-finite statistics");
  }
  if (!(std_ > 0.0)) {
    throw DegenerateChannelError("channel " + to_string(channel_) + " has zero variance");
  }
}

}  // namespace fairstyle
