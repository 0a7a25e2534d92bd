#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fairstyle {

/// Address of one style channel: layer index into the generator's style
/// layers, channel index within that layer.
struct ChannelId {
  std::size_t layer = 0;
  std::size_t channel = 0;

  friend auto operator<=>(const ChannelId&, const ChannelId&) = default;
};

std::string to_string(const ChannelId& id);

enum class LayerKind { conv, trgb };

struct LayerInfo {
  std::size_t width = 0;
  LayerKind kind = LayerKind::conv;
  int block = 0;

  friend bool operator==(const LayerInfo&, const LayerInfo&) = default;
};

/// Shape of a generator's style space: one entry per style layer, with the
/// conv/tRGB flag and synthesis block index each layer belongs to.
class StyleLayout {
 public:
  explicit StyleLayout(std::vector<LayerInfo> layers);

  std::size_t layer_count() const { return layers_.size(); }
  const LayerInfo& layer(std::size_t i) const { return layers_.at(i); }
  const std::vector<LayerInfo>& layers() const { return layers_; }
  std::size_t offset(std::size_t layer) const { return offsets_.at(layer); }
  std::size_t total_channels() const { return total_; }
  int last_block() const { return last_block_; }

  bool contains(const ChannelId& id) const;
  /// Throws AddressError when `id` is outside the layout.
  void check(const ChannelId& id) const;
  std::size_t flat_index(const ChannelId& id) const;
  ChannelId channel_at(std::size_t flat) const;

  /// Layer count + widths hash; persisted artifacts are bound to it.
  std::string fingerprint() const;

  friend bool operator==(const StyleLayout& a, const StyleLayout& b) { return a.layers_ == b.layers_; }

 private:
  std::vector<LayerInfo> layers_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
  int last_block_ = 0;
};

/// The s-space representation of one sample. Values are addressed per layer
/// through the shared layout; copies are independent.
class StyleCode {
 public:
  StyleCode(std::shared_ptr<const StyleLayout> layout, std::vector<double> values);
  static StyleCode zeros(std::shared_ptr<const StyleLayout> layout);

  const StyleLayout& layout() const { return *layout_; }
  const std::shared_ptr<const StyleLayout>& layout_ptr() const { return layout_; }

  std::span<const double> layer(std::size_t i) const;
  std::span<double> layer(std::size_t i);
  std::span<const double> values() const { return values_; }

  double at(const ChannelId& id) const { return values_[layout_->flat_index(id)]; }
  double& at(const ChannelId& id) { return values_[layout_->flat_index(id)]; }

  friend bool operator==(const StyleCode& a, const StyleCode& b) {
    return (a.layout_ == b.layout_ || *a.layout_ == *b.layout_) && a.values_ == b.values_;
  }

 private:
  std::shared_ptr<const StyleLayout> layout_;
  std::vector<double> values_;
};

/// Single-channel float image, row-major.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;

  friend bool operator==(const Image&, const Image&) = default;
};

/// Mean and unbiased standard deviation of one style channel.
class ChannelStats {
 public:
  ChannelStats(ChannelId channel, double mean, double std, std::size_t sample_count);

  const ChannelId& channel() const { return channel_; }
  double mean() const { return mean_; }
  double std() const { return std_; }
  std::size_t sample_count() const { return sample_count_; }

  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;

 private:
  ChannelId channel_;
  double mean_;
  double std_;
  std::size_t sample_count_;
};

}  // namespace fairstyle
