#include "fairstyle/debias/optimizer.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "fairstyle/audit/audit.hpp"
#include "fairstyle/core/error.hpp"
#include "fairstyle/core/hash.hpp"

namespace fairstyle::debias {

namespace {

bool finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::vector<double> hard_cells(const LabelMatrix& labels) {
  std::vector<std::size_t> counts(std::size_t{1} << labels.cols, 0);
  for (std::size_t r = 0; r < labels.rows; ++r) {
    std::size_t cell = 0;
    for (std::size_t c = 0; c < labels.cols; ++c) cell = (cell << 1) | labels.at(r, c);
    ++counts[cell];
  }
  std::vector<double> out;
  for (auto c : counts) out.push_back(static_cast<double>(c) / static_cast<double>(labels.rows));
  return out;
}

}  // namespace

std::string_view to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::max_iterations: return "max-iterations";
    case TerminalStatus::diverged: return "diverged";
  }
  return "unknown";
}

void OptimizerConfig::validate() const {
  if (batch_size < 2) throw ConfigError("optimizer batch size must be at least 2", "batch_size");
  if (!(fd_step > 0.0)) throw ConfigError("finite-difference step must be positive", "fd_step");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive", "tolerance");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive", "learning_rate");
  if (max_iterations == 0) throw ConfigError("max_iterations must be at least 1", "max_iterations");
  if (halve_after == 0 || converge_after == 0) throw ConfigError("schedule counts must be positive");
  if (evaluation_samples == 0) throw ConfigError("evaluation batch must not be empty", "evaluation_samples");
  if (statistics_samples < 2) throw ConfigError("statistics need at least two samples", "statistics_samples");
}

BatchObjective::BatchObjective(const GeneratorAdapter& generator, ClassifierSet classifiers,
                               std::span<const StyleCode> codes, TensorBuilder builder, bool soft)
    : generator_(generator), classifiers_(classifiers), codes_(codes), builder_(std::move(builder)), soft_(soft) {
  if (codes_.empty()) throw ConfigError("objective needs a non-empty batch");
  if (classifiers_.empty()) throw ConfigError("objective needs at least one classifier");
}

BatchObjective::Evaluation BatchObjective::evaluate(std::span<const double> params) const {
  const FairStyleTensor tensor = builder_(params);
  const auto images = render_batch(generator_, codes_, &tensor);
  const auto scores = score_batch(classifiers_, images);
  Evaluation e;
  e.cells = hard_cells(threshold_scores(classifiers_, scores));
  e.kl = audit::kl_to_uniform(e.cells);
  e.objective = soft_ ? audit::kl_to_uniform(audit::soft_cells(scores)) : e.kl;
  return e;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double h) {
  std::vector<double> grad(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double fairness_loss(const GeneratorAdapter& generator, ClassifierSet classifiers, const FairStyleTensor* tensor,
                     std::size_t n, std::uint64_t seed) {
  const Batch batch = generate_batch(generator, n, tensor, seed);
  const auto labels = threshold_scores(classifiers, score_batch(classifiers, batch.images));
  return audit::kl_to_uniform(hard_cells(labels));
}

ChannelStats compute_channel_stats(std::span<const StyleCode> codes, const ChannelId& channel) {
  if (codes.size() < 2) throw ConfigError("channel statistics need at least two samples", "statistics_samples");
  double sum = 0.0;
  for (const auto& c : codes) sum += c.at(channel);
  const double n = static_cast<double>(codes.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& c : codes) {
    const double d = c.at(channel) - mean;
    ss += d * d;
  }
  return ChannelStats(channel, mean, std::sqrt(ss / (n - 1.0)), codes.size());
}

ChannelStats compute_channel_stats(const GeneratorAdapter& generator, const ChannelId& channel, std::size_t n,
                                   std::uint64_t seed) {
  if (n < 2) throw ConfigError("channel statistics need at least two samples", "statistics_samples");
  generator.layout()->check(channel);
  return compute_channel_stats(sample_codes(generator, n, seed), channel);
}

FitResult optimize(const GeneratorAdapter& generator, ClassifierSet classifiers, std::vector<double> initial,
                   const TensorBuilder& builder, std::vector<std::string> parameter_names,
                   const OptimizerConfig& config) {
  config.validate();
  if (initial.empty()) throw ConfigError("nothing to optimize");
  validate(builder(initial), *generator.layout());

  OptimizationTrace trace;
  trace.parameter_names = std::move(parameter_names);
  std::vector<double> params = std::move(initial);
  std::vector<StyleCode> codes;
  if (config.batch_policy == BatchPolicy::fixed) {
    codes = sample_codes(generator, config.batch_size, derive_seed(config.seed, "fixed-batch"));
  }
  const auto held_out = sample_codes(generator, config.evaluation_samples, derive_seed(config.seed, "evaluation"));
  const BatchObjective evaluation(generator, classifiers, held_out, builder, false);

  struct Best {
    std::size_t iteration;
    double kl;
    double objective;
  };
  std::optional<Best> best;
  double lr = config.learning_rate;
  double previous_objective = std::numeric_limits<double>::quiet_NaN();
  std::size_t increases = 0;
  std::size_t below_tolerance = 0;
  trace.status = TerminalStatus::max_iterations;

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    if (config.batch_policy == BatchPolicy::fresh) {
      codes = sample_codes(generator, config.batch_size, derive_seed(config.seed, it));
    }
    if (!finite(params)) {
      trace.status = TerminalStatus::diverged;
      break;
    }
    const BatchObjective objective(generator, classifiers, codes, builder, config.soft_loss);
    const double current = objective.objective(params);
    auto eval = evaluation.evaluate(params);
    eval.objective = current;
    if (!std::isfinite(eval.objective) || !std::isfinite(eval.kl)) {
      trace.status = TerminalStatus::diverged;
      break;
    }
    if (!best || eval.kl < best->kl || (eval.kl == best->kl && eval.objective < best->objective)) {
      best = Best{it, eval.kl, eval.objective};
    }
    trace.records.push_back({it, params, std::move(eval.cells), eval.kl, eval.objective, best->kl, lr});

    below_tolerance = eval.kl < config.tolerance ? below_tolerance + 1 : 0;
    if (below_tolerance >= config.converge_after) {
      trace.status = TerminalStatus::converged;
      break;
    }
    if (it + 1 == config.max_iterations) break;

    increases = eval.objective > previous_objective ? increases + 1 : 0;
    if (increases >= config.halve_after) {
      lr *= 0.5;
      increases = 0;
    }
    previous_objective = eval.objective;

    const auto grad = central_difference([&](std::span<const double> p) { return objective.objective(p); }, params,
                                         config.fd_step);
    if (!finite(grad)) {
      trace.status = TerminalStatus::diverged;
      break;
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
  }

  if (!best) {
    // diverged before the first evaluation finished
    return {builder(std::vector<double>(params.size(), 0.0)), std::move(trace)};
  }
  trace.best_iteration = best->iteration;
  return {builder(trace.best_parameters()), std::move(trace)};
}

FitResult optimize_single(const GeneratorAdapter& generator, const ClassifierAdapter& classifier,
                          const ChannelId& channel, const OptimizerConfig& config) {
  const ClassifierAdapter* set[] = {&classifier};
  const TensorBuilder builder = [channel](std::span<const double> p) -> FairStyleTensor {
    return ScalarBias{channel, p[0]};
  };
  return optimize(generator, set, {0.0}, builder, {"c"}, config);
}

FitResult optimize_multi(const GeneratorAdapter& generator, ClassifierSet classifiers,
                         const std::vector<ChannelId>& targets, const OptimizerConfig& config) {
  config.validate();
  if (targets.size() < 2) throw ConfigError("joint debiasing needs at least two targets", "channels");
  const auto codes = sample_codes(generator, config.statistics_samples, derive_seed(config.seed, "channel-stats"));
  std::vector<ChannelStats> stats;
  for (const auto& t : targets) stats.push_back(compute_channel_stats(codes, t));
  return optimize_multi(generator, classifiers, targets, stats, config);
}

FitResult optimize_multi(const GeneratorAdapter& generator, ClassifierSet classifiers,
                         const std::vector<ChannelId>& targets, const std::vector<ChannelStats>& stats,
                         const OptimizerConfig& config) {
  const std::size_t m = targets.size();
  if (m < 2) throw ConfigError("joint debiasing needs at least two targets", "channels");
  if (classifiers.size() != m) throw ConfigError("need one classifier per target channel", "attributes");
  const std::size_t pairs = CoupledBias::pair_count(m);
  const TensorBuilder builder = [targets, stats, pairs](std::span<const double> p) -> FairStyleTensor {
    CoupledBias b;
    b.targets = targets;
    b.stats = stats;
    b.x.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(pairs));
    b.y.assign(p.begin() + static_cast<std::ptrdiff_t>(pairs), p.end());
    return b;
  };
  std::vector<std::string> names(2 * pairs);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k == a) continue;
      const auto idx = CoupledBias::pair_index(a, k, m);
      const auto suffix = "(" + std::to_string(a) + "," + std::to_string(k) + ")";
      names[idx] = "x" + suffix;
      names[pairs + idx] = "y" + suffix;
    }
  }
  return optimize(generator, classifiers, std::vector<double>(2 * pairs, 0.0), builder, std::move(names), config);
}

FitResult optimize_text_direction(const GeneratorAdapter& generator, const ClassifierAdapter& text_classifier,
                                  const SparseBias& direction, const OptimizerConfig& config) {
  bool nonzero = false;
  for (const auto& [id, w] : direction) nonzero = nonzero || w != 0.0;
  if (!nonzero) throw ConfigError("style direction is zero", "direction");
  const ClassifierAdapter* set[] = {&text_classifier};
  const TensorBuilder builder = [direction](std::span<const double> p) -> FairStyleTensor {
    return DirectionBias{direction, p[0]};
  };
  return optimize(generator, set, {0.0}, builder, {"alpha"}, config);
}

nlohmann::json to_json(const OptimizationTrace& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records) {
    records.push_back({{"iteration", r.iteration},
                       {"parameters", r.parameters},
                       {"cells", r.cells},
                       {"kl", r.kl},
                       {"objective", r.objective},
                       {"best_kl", r.best_kl},
                       {"learning_rate", r.learning_rate}});
  }
  return {{"status", std::string(to_string(trace.status))},
          {"parameter_names", trace.parameter_names},
          {"best_iteration", trace.best_iteration},
          {"initial_kl", trace.initial_kl()},
          {"best_kl", trace.best_kl()},
          {"records", records}};
}

}  // namespace fairstyle::debias
