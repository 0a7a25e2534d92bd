#include "fairstyle/synth/text_backend.hpp"

#include <cmath>

#include "fairstyle/core/error.hpp"

namespace fairstyle::synth {

SyntheticTextBackend::SyntheticTextBackend(const SyntheticModel& model) {
  for (std::size_t a = 0; a < model.spec.attributes.size(); ++a) {
    const auto& attr = model.spec.attributes[a];
    if (!attr.prompts) continue;
    const std::size_t plane = readers_.size();
    readers_.push_back(model.classifiers.at(a));
    thresholds_.push_back(model.oracle->threshold(a));
    if (!prompts_.emplace(attr.prompts->positive, std::make_pair(plane, 1.0)).second ||
        !prompts_.emplace(attr.prompts->negative, std::make_pair(plane, -1.0)).second) {
      throw ConfigError("prompt text is shared between attributes", "prompts");
    }
  }
  if (readers_.empty()) throw ConfigError("no attribute in the synthetic spec declares prompts", "prompts");
}

textclip::Embedding SyntheticTextBackend::embed_image(const Image& image) const {
  const double scale = 1.0 / std::sqrt(static_cast<double>(readers_.size()));
  textclip::Embedding e(2 * readers_.size(), 0.0);
  for (std::size_t p = 0; p < readers_.size(); ++p) {
    const double u = 1.0;
    const double v = readers_[p]->readout(image) - thresholds_[p];
    const double n = std::hypot(u, v);
    e[2 * p] = scale * u / n;
    e[2 * p + 1] = scale * v / n;
  }
  return e;
}

textclip::Embedding SyntheticTextBackend::embed_text(std::string_view text) const {
  const auto it = prompts_.find(text);
  if (it == prompts_.end()) throw AdapterError("synthetic text backend does not know the prompt '" + std::string(text) + "'");
  textclip::Embedding e(2 * readers_.size(), 0.0);
  e[2 * it->second.first + 1] = it->second.second;
  return e;
}

}  // namespace fairstyle::synth
