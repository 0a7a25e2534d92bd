#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairstyle/core/batch.hpp"
#include "fairstyle/core/tensor.hpp"

namespace fairstyle::debias {

enum class BatchPolicy {
  fresh,  // new latent batch every iteration
  fixed,  // one batch for the whole run
};

enum class TerminalStatus { converged, max_iterations, diverged };

std::string_view to_string(TerminalStatus status);

struct OptimizerConfig {
  std::size_t batch_size = 128;
  std::size_t max_iterations = 500;
  double tolerance = 1e-3;          // hard-label KL
  double fd_step = 1e-2;            // central-difference step
  double learning_rate = 0.5;
  std::size_t halve_after = 5;      // consecutive objective increases before lr is halved
  std::size_t converge_after = 3;   // consecutive iterations below tolerance
  BatchPolicy batch_policy = BatchPolicy::fresh;
  bool soft_loss = true;            // descend the KL of score-accumulated cells
  std::size_t statistics_samples = 1000;
  std::size_t evaluation_samples = 10000;  // fixed batch that scores every iterate
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<double> parameters;
  std::vector<double> cells;  // hard-label distribution on the evaluation batch
  double kl = 0.0;            // hard-label KL to uniform on the evaluation batch
  double objective = 0.0;     // value being descended, on this iteration's batch
  double best_kl = 0.0;       // best hard-label KL so far
  double learning_rate = 0.0;
};

struct OptimizationTrace {
  std::vector<std::string> parameter_names;
  std::vector<IterationRecord> records;
  TerminalStatus status = TerminalStatus::max_iterations;
  std::size_t best_iteration = 0;

  double initial_kl() const { return records.empty() ? 0.0 : records.front().kl; }
  double best_kl() const { return records.empty() ? 0.0 : records.back().best_kl; }
  const std::vector<double>& best_parameters() const { return records.at(best_iteration).parameters; }
};

struct FitResult {
  FairStyleTensor tensor;
  OptimizationTrace trace;
};

using TensorBuilder = std::function<FairStyleTensor(std::span<const double>)>;

/// Loss of a parameter vector on a fixed set of codes.
class BatchObjective {
 public:
  struct Evaluation {
    double objective = 0.0;
    double kl = 0.0;
    std::vector<double> cells;
  };

  BatchObjective(const GeneratorAdapter& generator, ClassifierSet classifiers, std::span<const StyleCode> codes,
                 TensorBuilder builder, bool soft);

  Evaluation evaluate(std::span<const double> params) const;
  double objective(std::span<const double> params) const { return evaluate(params).objective; }

 private:
  const GeneratorAdapter& generator_;
  ClassifierSet classifiers_;
  std::span<const StyleCode> codes_;
  TensorBuilder builder_;
  bool soft_;
};

/// (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double h);

/// Hard-label KL to uniform of the joint distribution of all classifiers
/// over n samples generated with the tensor applied.
double fairness_loss(const GeneratorAdapter& generator, ClassifierSet classifiers, const FairStyleTensor* tensor,
                     std::size_t n, std::uint64_t seed);

/// Sample mean and unbiased standard deviation of one channel over n fresh
/// codes. Zero variance raises DegenerateChannelError.
ChannelStats compute_channel_stats(const GeneratorAdapter& generator, const ChannelId& channel, std::size_t n,
                                   std::uint64_t seed);
ChannelStats compute_channel_stats(std::span<const StyleCode> codes, const ChannelId& channel);

/// Gradient descent on the parameters of `builder`, starting at `initial`.
/// Gradients come from the iteration batch; every iterate is also scored
/// on one fixed evaluation batch, and the returned tensor is the iterate
/// with the lowest hard-label KL there. Convergence is judged on the same
/// evaluation KL.
FitResult optimize(const GeneratorAdapter& generator, ClassifierSet classifiers, std::vector<double> initial,
                   const TensorBuilder& builder, std::vector<std::string> parameter_names,
                   const OptimizerConfig& config);

/// Scalar bias on one channel, starting from c = 0.
FitResult optimize_single(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                          const ChannelId& channel, const OptimizerConfig& config);

/// Affine-coupled bias over one channel per classifier (same order), all
/// parameters starting at 0. Channel statistics are computed first from
/// config.statistics_samples codes and kept fixed.
FitResult optimize_multi(const GeneratorAdapter& generator, ClassifierSet classifiers,
                         const std::vector<ChannelId>& targets, const OptimizerConfig& config);
FitResult optimize_multi(const GeneratorAdapter& generator, ClassifierSet classifiers,
                         const std::vector<ChannelId>& targets, const std::vector<ChannelStats>& stats,
                         const OptimizerConfig& config);

/// Strength alpha of a fixed style direction, starting from 0. A direction
/// without non-zero weights raises ConfigError.
FitResult optimize_text_direction(const GeneratorAdapter& generator, const ClassifierAdapter& text_classifier,
                                  const SparseBias& direction, const OptimizerConfig& config);

nlohmann::json to_json(const OptimizationTrace& trace);

}  // namespace fairstyle::debias
