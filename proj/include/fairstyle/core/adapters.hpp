#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "fairstyle/core/style.hpp"
#include "fairstyle/core/tensor.hpp"

namespace fairstyle {

/// Drives a style-based generator. Implementations must be deterministic:
/// the same latent seed gives the same style code, and the same style code
/// gives the same image. Any stochastic noise inputs derive from the seed.
class GeneratorAdapter {
 public:
  virtual ~GeneratorAdapter() = default;

  virtual std::shared_ptr<const StyleLayout> layout() const = 0;

  /// latent (identified by its seed) -> style code
  virtual StyleCode sample_style(std::uint64_t latent_seed) const = 0;

  /// style code -> image
  virtual Image render(const StyleCode& code) const = 0;

  /// True when render/sample_style may be called from several threads at once.
  virtual bool concurrent_safe() const { return false; }

  /// Renders `code` with the tensor applied; a null tensor renders as-is.
  Image synthesize(const StyleCode& code, const FairStyleTensor* tensor = nullptr) const;
};

/// Binary attribute scorer: image -> presence probability in [0, 1].
class ClassifierAdapter {
 public:
  enum class Boundary {
    inclusive,  // label = score >= threshold
    exclusive,  // label = score > threshold
  };

  explicit ClassifierAdapter(std::string attribute, double threshold = 0.5,
                             Boundary boundary = Boundary::inclusive);
  virtual ~ClassifierAdapter() = default;

  const std::string& attribute() const { return attribute_; }
  double threshold() const { return threshold_; }
  Boundary boundary() const { return boundary_; }

  virtual double score(const Image& image) const = 0;
  virtual bool concurrent_safe() const { return false; }

  bool label(double score) const {
    return boundary_ == Boundary::inclusive ? score >= threshold_ : score > threshold_;
  }

 private:
  std::string attribute_;
  double threshold_;
  Boundary boundary_;
};

}  // namespace fairstyle
