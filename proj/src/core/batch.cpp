#include "fairstyle/core/batch.hpp"

#include <algorithm>
#include <cmath>

#include "fairstyle/core/error.hpp"
#include "fairstyle/core/hash.hpp"
#include "fairstyle/core/parallel.hpp"

namespace fairstyle {

namespace {

AdapterError sample_failure(const char* stage, std::size_t index, const std::exception& e) {
  return AdapterError(std::string(stage) + " failed for sample " + std::to_string(index) + ": " + e.what());
}

StyleCode sample_one(const GeneratorAdapter& generator, std::uint64_t batch_seed, std::size_t i) {
  try {
    return generator.sample_style(latent_seed(batch_seed, i));
  } catch (const std::exception& e) {
    throw sample_failure("style sampling", i, e);
  }
}

Image render_one(const GeneratorAdapter& generator, const StyleCode& code, const FairStyleTensor* tensor,
                 std::size_t i) {
  try {
    return generator.synthesize(code, tensor);
  } catch (const std::exception& e) {
    throw sample_failure("generation", i, e);
  }
}

double score_one(const ClassifierAdapter& classifier, const Image& image, std::size_t i) {
  double s = 0.0;
  try {
    s = classifier.score(image);
  } catch (const std::exception& e) {
    throw AdapterError("classifier '" + classifier.attribute() + "' failed on image " + std::to_string(i) + ": " +
                       e.what());
  }
  if (!(s >= 0.0 && s <= 1.0)) {
    throw AdapterError("classifier '" + classifier.attribute() + "' returned score " + std::to_string(s) +
                       " outside [0, 1] on image " + std::to_string(i));
  }
  return s;
}

bool all_concurrent(ClassifierSet classifiers) {
  return std::all_of(classifiers.begin(), classifiers.end(),
                     [](const ClassifierAdapter* c) { return c->concurrent_safe(); });
}

ScoreMatrix empty_scores(ClassifierSet classifiers, std::size_t rows) {
  if (classifiers.empty()) throw ConfigError("no classifiers given");
  ScoreMatrix out;
  out.rows = rows;
  out.cols = classifiers.size();
  for (const auto* c : classifiers) out.attributes.push_back(c->attribute());
  out.values.assign(rows * out.cols, 0.0);
  return out;
}

void validate_for(const GeneratorAdapter& generator, const FairStyleTensor* tensor) {
  if (tensor != nullptr) validate(*tensor, *generator.layout());
}

}  // namespace

std::uint64_t latent_seed(std::uint64_t batch_seed, std::size_t index) { return derive_seed(batch_seed, index); }

std::vector<StyleCode> sample_codes(const GeneratorAdapter& generator, std::size_t n, std::uint64_t batch_seed) {
  std::vector<StyleCode> codes(n, StyleCode::zeros(generator.layout()));
  detail::parallel_for(n, generator.concurrent_safe(),
                       [&](std::size_t i) { codes[i] = sample_one(generator, batch_seed, i); });
  return codes;
}

std::vector<Image> render_batch(const GeneratorAdapter& generator, std::span<const StyleCode> codes,
                                const FairStyleTensor* tensor) {
  validate_for(generator, tensor);
  std::vector<Image> images(codes.size());
  detail::parallel_for(codes.size(), generator.concurrent_safe(),
                       [&](std::size_t i) { images[i] = render_one(generator, codes[i], tensor, i); });
  return images;
}

ScoreMatrix score_batch(ClassifierSet classifiers, std::span<const Image> images) {
  ScoreMatrix out = empty_scores(classifiers, images.size());
  detail::parallel_for(images.size(), all_concurrent(classifiers), [&](std::size_t i) {
    for (std::size_t c = 0; c < classifiers.size(); ++c) out.at(i, c) = score_one(*classifiers[c], images[i], i);
  });
  return out;
}

LabelMatrix threshold_scores(ClassifierSet classifiers, const ScoreMatrix& scores) {
  if (classifiers.size() != scores.cols) throw ConfigError("classifier count does not match score columns");
  LabelMatrix out;
  out.rows = scores.rows;
  out.cols = scores.cols;
  out.attributes = scores.attributes;
  out.values.resize(scores.values.size());
  for (std::size_t r = 0; r < scores.rows; ++r) {
    for (std::size_t c = 0; c < scores.cols; ++c) out.at(r, c) = classifiers[c]->label(scores.at(r, c)) ? 1 : 0;
  }
  return out;
}

Batch generate_batch(const GeneratorAdapter& generator, std::size_t n, const FairStyleTensor* tensor,
                     std::uint64_t batch_seed) {
  if (n == 0) throw ConfigError("batch size must be at least 1", "n");
  validate_for(generator, tensor);
  Batch batch;
  batch.latent_seeds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.latent_seeds.push_back(latent_seed(batch_seed, i));
  batch.codes = sample_codes(generator, n, batch_seed);
  batch.images = render_batch(generator, batch.codes, tensor);
  return batch;
}

namespace reference {

std::vector<StyleCode> sample_codes(const GeneratorAdapter& generator, std::size_t n, std::uint64_t batch_seed) {
  std::vector<StyleCode> codes;
  codes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) codes.push_back(sample_one(generator, batch_seed, i));
  return codes;
}

std::vector<Image> render_batch(const GeneratorAdapter& generator, std::span<const StyleCode> codes,
                                const FairStyleTensor* tensor) {
  validate_for(generator, tensor);
  std::vector<Image> images;
  images.reserve(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) images.push_back(render_one(generator, codes[i], tensor, i));
  return images;
}

ScoreMatrix score_batch(ClassifierSet classifiers, std::span<const Image> images) {
  ScoreMatrix out = empty_scores(classifiers, images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t c = 0; c < classifiers.size(); ++c) out.at(i, c) = score_one(*classifiers[c], images[i], i);
  }
  return out;
}

}  // namespace reference

}  // namespace fairstyle
