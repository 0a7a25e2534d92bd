#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairstyle/core/adapters.hpp"

namespace fairstyle::textclip {

using Embedding = std::vector<double>;

/// Joint image/text embedding model. Both embeddings live in one space and
/// have unit L2 norm; the same input always yields the same embedding.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual Embedding embed_image(const Image& image) const = 0;
  virtual Embedding embed_text(std::string_view text) const = 0;
  virtual bool concurrent_safe() const { return false; }
};

/// Positive prompt describing the attribute and a negative prompt negating it.
class PromptPair {
 public:
  PromptPair(std::string positive, std::string negative);

  const std::string& positive() const { return positive_; }
  const std::string& negative() const { return negative_; }
  PromptPair swapped() const { return PromptPair(negative_, positive_); }

 private:
  std::string positive_;
  std::string negative_;
};

struct ClipDecision {
  bool label = false;
  double positive_distance = 0.0;
  double negative_distance = 0.0;
};

/// 1 - <a, b> for unit vectors. Throws AdapterError on a dimension mismatch
/// or a vector whose norm is not 1 within 1e-6.
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// Label 1 iff the image is strictly closer to the positive prompt.
ClipDecision decide(std::span<const double> image, std::span<const double> positive,
                    std::span<const double> negative);

ClipDecision clip_label(const EmbeddingBackend& backend, const Image& image, const PromptPair& prompts);

/// Softmax weight of the positive prompt over negative distances. Above 0.5
/// exactly when the positive distance is smaller.
double decision_score(double positive_distance, double negative_distance);

/// ClassifierAdapter over an embedding backend. Prompt embeddings are
/// computed once. Labels use an exclusive 0.5 boundary, so thresholding the
/// score reproduces clip_label exactly, ties included.
class ClipClassifier final : public ClassifierAdapter {
 public:
  ClipClassifier(std::shared_ptr<const EmbeddingBackend> backend, PromptPair prompts, std::string attribute);

  double score(const Image& image) const override;
  bool concurrent_safe() const override { return backend_->concurrent_safe(); }

  const PromptPair& prompts() const { return prompts_; }
  ClipDecision decision(const Image& image) const;

 private:
  std::shared_ptr<const EmbeddingBackend> backend_;
  PromptPair prompts_;
  Embedding positive_;
  Embedding negative_;
};

std::shared_ptr<const ClipClassifier> as_classifier_adapter(std::shared_ptr<const EmbeddingBackend> backend,
                                                            const PromptPair& prompts, std::string attribute = {});

}  // namespace fairstyle::textclip
