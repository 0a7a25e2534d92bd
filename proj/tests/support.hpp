#pragma once

#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fairstyle/core/adapters.hpp"
#include "fairstyle/core/error.hpp"
#include "fairstyle/textclip/textclip.hpp"

namespace testing {

using namespace fairstyle;

// KL(p || U) from its definition, sum p ln(p / u) with u = 1/K, in long double.
inline double brute_kl(const std::vector<double>& p) {
  const long double u = 1.0L / static_cast<long double>(p.size());
  long double acc = 0.0L;
  for (double v : p) {
    if (v != 0.0) acc += static_cast<long double>(v) * std::log(static_cast<long double>(v) / u);
  }
  return static_cast<double>(acc < 0 ? 0 : acc);
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t cells, double zero_rate = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(cells);
  double sum = 0.0;
  for (auto& v : p) {
    v = u(rng) < zero_rate ? 0.0 : u(rng);
    sum += v;
  }
  if (sum == 0.0) {
    p[0] = 1.0;
    sum = 1.0;
  }
  for (auto& v : p) v /= sum;
  return p;
}

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = n(rng);
      norm += x * x;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

// Embedding backend with hand-set prompt embeddings; the image embedding is
// read straight from the pixels.
class MockBackend final : public textclip::EmbeddingBackend {
 public:
  explicit MockBackend(std::map<std::string, textclip::Embedding, std::less<>> texts) : texts_(std::move(texts)) {}

  textclip::Embedding embed_image(const Image& image) const override {
    return textclip::Embedding(image.pixels.begin(), image.pixels.end());
  }
  textclip::Embedding embed_text(std::string_view text) const override {
    const auto it = texts_.find(text);
    if (it == texts_.end()) throw AdapterError("unknown prompt");
    return it->second;
  }
  bool concurrent_safe() const override { return true; }

 private:
  std::map<std::string, textclip::Embedding, std::less<>> texts_;
};

// Images that hold an embedding exactly; pixels are float, so the
// embedding is rounded to float and renormalized in double.
inline Image embedding_image(std::vector<double>& e) {
  Image img;
  img.width = e.size();
  img.height = 1;
  for (double v : e) img.pixels.push_back(static_cast<float>(v));
  double norm = 0.0;
  for (float v : img.pixels) norm += static_cast<double>(v) * v;
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = img.pixels[i] / norm;
  return img;
}

// Multiplies another classifier's score by k in (0, 1].
class ScaledClassifier final : public ClassifierAdapter {
 public:
  ScaledClassifier(const ClassifierAdapter& inner, double k) : ClassifierAdapter(inner.attribute()), inner_(inner), k_(k) {}
  double score(const Image& image) const override { return k_ * inner_.score(image); }
  bool concurrent_safe() const override { return inner_.concurrent_safe(); }

 private:
  const ClassifierAdapter& inner_;
  double k_;
};

// Classifier with an arbitrary score function.
class LambdaClassifier final : public ClassifierAdapter {
 public:
  LambdaClassifier(std::string name, std::function<double(const Image&)> f, bool safe = true)
      : ClassifierAdapter(std::move(name)), f_(std::move(f)), safe_(safe) {}
  double score(const Image& image) const override { return f_(image); }
  bool concurrent_safe() const override { return safe_; }

 private:
  std::function<double(const Image&)> f_;
  bool safe_;
};

// Wraps a generator and fails on one latent seed or one render call.
class FailingGenerator final : public GeneratorAdapter {
 public:
  FailingGenerator(const GeneratorAdapter& inner, std::uint64_t bad_seed) : inner_(inner), bad_seed_(bad_seed) {}
  std::shared_ptr<const StyleLayout> layout() const override { return inner_.layout(); }
  StyleCode sample_style(std::uint64_t seed) const override {
    if (seed == bad_seed_) throw AdapterError("synthetic failure");
    return inner_.sample_style(seed);
  }
  Image render(const StyleCode& code) const override { return inner_.render(code); }
  bool concurrent_safe() const override { return true; }

 private:
  const GeneratorAdapter& inner_;
  std::uint64_t bad_seed_;
};

inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace testing
