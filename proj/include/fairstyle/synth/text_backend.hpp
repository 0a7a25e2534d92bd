#pragma once

#include <map>
#include <string>
#include <utility>

#include "fairstyle/synth/synthetic.hpp"
#include "fairstyle/textclip/textclip.hpp"

namespace fairstyle::synth {

/// Embedding backend for synthetic models. Every attribute that declares
/// prompts owns one 2-D plane; an image's component in that plane is
/// (1, readout - threshold) normalized, so it lies closer to the positive
/// prompt exactly when the planted classifier would label it 1.
class SyntheticTextBackend final : public textclip::EmbeddingBackend {
 public:
  explicit SyntheticTextBackend(const SyntheticModel& model);

  textclip::Embedding embed_image(const Image& image) const override;
  textclip::Embedding embed_text(std::string_view text) const override;
  bool concurrent_safe() const override { return true; }

 private:
  std::vector<std::shared_ptr<const SyntheticClassifier>> readers_;
  std::vector<double> thresholds_;
  std::map<std::string, std::pair<std::size_t, double>, std::less<>> prompts_;  // text -> (plane, sign)
};

}  // namespace fairstyle::synth
