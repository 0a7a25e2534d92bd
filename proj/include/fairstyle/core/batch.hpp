#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairstyle/core/adapters.hpp"

namespace fairstyle {

using ClassifierSet = std::span<const ClassifierAdapter* const>;

/// Row-major (sample, attribute) matrix.
template <typename T>
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> attributes;  // column names
  std::vector<T> values;

  T at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  T& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }

  friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;
};

using ScoreMatrix = SampleMatrix<double>;
using LabelMatrix = SampleMatrix<std::uint8_t>;

struct Batch {
  std::vector<std::uint64_t> latent_seeds;
  std::vector<StyleCode> codes;  // sampled codes, before any tensor
  std::vector<Image> images;     // rendered with the tensor applied
};

/// Latent seed of sample `index` in a batch seeded with `batch_seed`.
std::uint64_t latent_seed(std::uint64_t batch_seed, std::size_t index);

std::vector<StyleCode> sample_codes(const GeneratorAdapter& generator, std::size_t n,
                                    std::uint64_t batch_seed);

std::vector<Image> render_batch(const GeneratorAdapter& generator, std::span<const StyleCode> codes,
                                const FairStyleTensor* tensor = nullptr);

/// Scores every image with every classifier. Scores outside [0, 1] raise an
/// AdapterError naming the attribute and image index.
ScoreMatrix score_batch(ClassifierSet classifiers, std::span<const Image> images);

/// Thresholds a score matrix with each column's classifier.
LabelMatrix threshold_scores(ClassifierSet classifiers, const ScoreMatrix& scores);

/// n samples from `batch_seed`, rendered with the optional tensor. Throws
/// ConfigError for n == 0; adapter failures carry the sample index.
Batch generate_batch(const GeneratorAdapter& generator, std::size_t n,
                     const FairStyleTensor* tensor, std::uint64_t batch_seed);

/// Serial versions of the batch kernels. They define the expected output of
/// the parallel kernels bit for bit.
namespace reference {

std::vector<StyleCode> sample_codes(const GeneratorAdapter& generator, std::size_t n,
                                    std::uint64_t batch_seed);
std::vector<Image> render_batch(const GeneratorAdapter& generator, std::span<const StyleCode> codes,
                                const FairStyleTensor* tensor = nullptr);
ScoreMatrix score_batch(ClassifierSet classifiers, std::span<const Image> images);

}  // namespace reference

}  // namespace fairstyle
