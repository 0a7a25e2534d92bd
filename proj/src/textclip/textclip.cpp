#include "fairstyle/textclip/textclip.hpp"

#include <cmath>
#include <limits>

#include "fairstyle/core/error.hpp"

namespace fairstyle::textclip {

PromptPair::PromptPair(std::string positive, std::string negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {
  if (positive_.empty() || negative_.empty()) throw ConfigError("prompts must be non-empty", "prompts");
  if (positive_ == negative_) throw ConfigError("positive and negative prompts must differ", "prompts");
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw AdapterError("embedding dimensions differ (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (std::abs(std::sqrt(na) - 1.0) > 1e-6 || std::abs(std::sqrt(nb) - 1.0) > 1e-6) {
    throw AdapterError("embedding is not unit norm");
  }
  return 1.0 - dot;
}

ClipDecision decide(std::span<const double> image, std::span<const double> positive,
                    std::span<const double> negative) {
  ClipDecision d;
  d.positive_distance = cosine_distance(image, positive);
  d.negative_distance = cosine_distance(image, negative);
  d.label = d.positive_distance < d.negative_distance;
  return d;
}

ClipDecision clip_label(const EmbeddingBackend& backend, const Image& image, const PromptPair& prompts) {
  return decide(backend.embed_image(image), backend.embed_text(prompts.positive()),
                backend.embed_text(prompts.negative()));
}

double decision_score(double positive_distance, double negative_distance) {
  const double s = 1.0 / (1.0 + std::exp(positive_distance - negative_distance));
  // keep the decision when the softmax rounds to exactly one half
  if (s == 0.5 && positive_distance < negative_distance) return std::nextafter(0.5, 1.0);
  if (s == 0.5 && positive_distance > negative_distance) return std::nextafter(0.5, 0.0);
  return s;
}

ClipClassifier::ClipClassifier(std::shared_ptr<const EmbeddingBackend> backend, PromptPair prompts, std::string attribute)
    : ClassifierAdapter(attribute.empty() ? prompts.positive() : std::move(attribute), 0.5, Boundary::exclusive),
      backend_(std::move(backend)),
      prompts_(std::move(prompts)) {
  if (!backend_) throw ConfigError("text classifier needs an embedding backend");
  positive_ = backend_->embed_text(prompts_.positive());
  negative_ = backend_->embed_text(prompts_.negative());
}

ClipDecision ClipClassifier::decision(const Image& image) const {
  return decide(backend_->embed_image(image), positive_, negative_);
}

double ClipClassifier::score(const Image& image) const {
  const auto d = decision(image);
  return decision_score(d.positive_distance, d.negative_distance);
}

std::shared_ptr<const ClipClassifier> as_classifier_adapter(std::shared_ptr<const EmbeddingBackend> backend,
                                                            const PromptPair& prompts, std::string attribute) {
  return std::make_shared<const ClipClassifier>(std::move(backend), prompts, std::move(attribute));
}

}  // namespace fairstyle::textclip
