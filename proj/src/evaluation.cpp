#include "csol/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <random>

namespace csol {

void ConfusionCounts::add(int truth, int predicted) {
  if (truth == 1) {
    ++(predicted == 1 ? tp : fn);
  } else {
    ++(predicted == 1 ? fp : tn);
  }
}

MulticlassCounts::MulticlassCounts(std::size_t num_classes)
    : k_(num_classes), counts_(num_classes * num_classes, 0) {}

void MulticlassCounts::add(int truth, int predicted) {
  if (truth < 1 || predicted < 1 || static_cast<std::size_t>(truth) > k_ ||
      static_cast<std::size_t>(predicted) > k_) {
    throw ConfigError("class index outside 1.." + std::to_string(k_));
  }
  ++counts_[static_cast<std::size_t>(truth - 1) * k_ + static_cast<std::size_t>(predicted - 1)];
}

std::uint64_t MulticlassCounts::at(int truth, int predicted) const {
  return counts_[static_cast<std::size_t>(truth - 1) * k_ + static_cast<std::size_t>(predicted - 1)];
}

std::uint64_t MulticlassCounts::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts_) sum += c;
  return sum;
}

std::uint64_t MulticlassCounts::trace() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < k_; ++i) sum += counts_[i * k_ + i];
  return sum;
}

ConfusionCounts MulticlassCounts::one_vs_rest(int target) const {
  if (target < 1 || static_cast<std::size_t>(target) > k_) {
    throw ConfigError("target class " + std::to_string(target) + " outside 1.." +
                      std::to_string(k_));
  }
  ConfusionCounts out;
  for (std::size_t t = 1; t <= k_; ++t) {
    for (std::size_t p = 1; p <= k_; ++p) {
      const auto n = at(static_cast<int>(t), static_cast<int>(p));
      const bool truth_pos = static_cast<int>(t) == target;
      const bool pred_pos = static_cast<int>(p) == target;
      if (truth_pos && pred_pos) out.tp += n;
      if (truth_pos && !pred_pos) out.fn += n;
      if (!truth_pos && pred_pos) out.fp += n;
      if (!truth_pos && !pred_pos) out.tn += n;
    }
  }
  return out;
}

MulticlassCounts MulticlassCounts::from_rows(const std::vector<std::vector<std::uint64_t>>& rows) {
  MulticlassCounts out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw ConfigError("count matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) out.counts_[i * rows.size() + j] = rows[i][j];
  }
  return out;
}

std::optional<double> sensitivity(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> specificity(const ConfusionCounts& c) {
  if (c.tn + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

double weighted_sum(double sens, double spec, double eta_p, double eta_n) {
  if (!(eta_p >= 0.0 && eta_n >= 0.0 && eta_p <= 1.0 && eta_n <= 1.0) ||
      std::abs(eta_p + eta_n - 1.0) > 1e-12) {
    throw ConfigError("weights eta_p and eta_n must be non-negative and sum to 1");
  }
  return eta_p * sens + eta_n * spec;
}

std::optional<double> weighted_sum(std::optional<double> sens, std::optional<double> spec,
                                   double eta_p, double eta_n) {
  if (!sens || !spec) {
    weighted_sum(0.0, 0.0, eta_p, eta_n);  // still validate the weights
    return std::nullopt;
  }
  return weighted_sum(*sens, *spec, eta_p, eta_n);
}

ClassMetrics one_vs_rest_metrics(const MulticlassCounts& counts, int target_class, double eta_p,
                                 double eta_n) {
  const auto binary = counts.one_vs_rest(target_class);
  ClassMetrics m;
  m.sensitivity = sensitivity(binary);
  m.specificity = specificity(binary);
  m.weighted_sum = weighted_sum(m.sensitivity, m.specificity, eta_p, eta_n);
  return m;
}

MetricSummary summarize(std::span<const std::optional<double>> values) {
  MetricSummary s;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++s.defined;
    }
  }
  if (s.defined == 0) return s;
  const double mean = sum / static_cast<double>(s.defined);
  double sq = 0.0;
  for (const auto& v : values) {
    if (v) sq += (*v - mean) * (*v - mean);
  }
  s.mean = mean;
  s.stddev = std::sqrt(sq / static_cast<double>(s.defined));
  return s;
}

namespace {

std::optional<double> mean_of_defined(std::span<const std::optional<double>> values) {
  return summarize(values).mean;
}

}  // namespace

MetricSnapshot snapshot(std::size_t round, const ConfusionCounts& counts, double cumulative_loss,
                        double eta_p, double eta_n) {
  MetricSnapshot s;
  s.round = round;
  s.error_rate = round == 0 ? 0.0
                            : static_cast<double>(counts.fp + counts.fn) / static_cast<double>(round);
  s.sensitivity = sensitivity(counts);
  s.specificity = specificity(counts);
  s.weighted_sum = weighted_sum(s.sensitivity, s.specificity, eta_p, eta_n);
  s.cumulative_loss = cumulative_loss;
  return s;
}

MetricSnapshot snapshot(std::size_t round, const MulticlassCounts& counts,
                        double cumulative_loss, double eta_p, double eta_n) {
  MetricSnapshot s;
  s.round = round;
  s.error_rate = round == 0 ? 0.0
                            : static_cast<double>(counts.total() - counts.trace()) /
                                  static_cast<double>(round);
  s.cumulative_loss = cumulative_loss;
  std::vector<std::optional<double>> sens, spec, sums;
  for (std::size_t c = 1; c <= counts.num_classes(); ++c) {
    s.per_class.push_back(one_vs_rest_metrics(counts, static_cast<int>(c), eta_p, eta_n));
    sens.push_back(s.per_class.back().sensitivity);
    spec.push_back(s.per_class.back().specificity);
    sums.push_back(s.per_class.back().weighted_sum);
  }
  s.sensitivity = mean_of_defined(sens);
  s.specificity = mean_of_defined(spec);
  s.weighted_sum = mean_of_defined(sums);
  return s;
}

namespace {

template <typename Learner, typename Counts, typename Validate>
RunResult run_loop(Learner& learner, std::span<const LabeledExample> examples,
                   const RunOptions& options, std::span<const std::size_t> order, Counts counts,
                   Validate&& validate_label) {
  if (examples.empty()) throw ConfigError("prequential run needs a non-empty stream");
  if (options.curve_stride == 0) throw ConfigError("curve stride must be positive");
  if (!order.empty() && order.size() > examples.size()) {
    throw ConfigError("sample order is longer than the stream");
  }
  weighted_sum(0.0, 0.0, options.eta_p, options.eta_n);

  const std::size_t n = order.empty() ? examples.size() : order.size();
  RunResult result;
  double cumulative_loss = 0.0;
  std::chrono::steady_clock::duration elapsed{};
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t idx = order.empty() ? t : order[t];
    const auto& ex = examples[idx];
    if (ex.x.dim() != learner.dim()) {
      throw DimensionError("round " + std::to_string(t + 1) + ": sample dimension " +
                           std::to_string(ex.x.dim()) + " does not match model dimension " +
                           std::to_string(learner.dim()));
    }
    validate_label(ex.label, t + 1);
    const auto start = std::chrono::steady_clock::now();
    const StepOutcome out = learner.step(ex);
    elapsed += std::chrono::steady_clock::now() - start;
    counts.add(ex.label, out.predicted);
    cumulative_loss += out.loss;
    const std::size_t round = t + 1;
    if (round % options.curve_stride == 0 || round == n) {
      result.curve.push_back(snapshot(round, counts, cumulative_loss, options.eta_p, options.eta_n));
    }
  }
  result.seconds = std::chrono::duration<double>(elapsed).count();
  if constexpr (std::is_same_v<Counts, ConfusionCounts>) {
    result.binary_counts = counts;
  } else {
    result.multiclass_counts = counts;
  }
  return result;
}

}  // namespace

RunResult prequential_run(BinaryLearner& learner, std::span<const LabeledExample> examples,
                          const RunOptions& options, std::span<const std::size_t> order) {
  return run_loop(learner, examples, options, order, ConfusionCounts{},
                  [](int label, std::size_t round) {
                    if (label != 1 && label != -1) {
                      throw ConfigError("round " + std::to_string(round) + ": label " +
                                        std::to_string(label) + " is not -1 or +1");
                    }
                  });
}

RunResult prequential_run(MulticlassLearner& learner, std::span<const LabeledExample> examples,
                          const RunOptions& options, std::span<const std::size_t> order) {
  const std::size_t k = learner.num_classes();
  return run_loop(learner, examples, options, order, MulticlassCounts(k),
                  [k](int label, std::size_t round) {
                    if (label < 1 || static_cast<std::size_t>(label) > k) {
                      throw ConfigError("round " + std::to_string(round) + ": label " +
                                        std::to_string(label) + " outside 1.." +
                                        std::to_string(k));
                    }
                  });
}

std::string_view to_string(CostMode mode) {
  switch (mode) {
    case CostMode::kUnit: return "unit";
    case CostMode::kInverseCount: return "inverse-count";
    case CostMode::kExplicit: return "file";
  }
  return "unknown";
}

CostMode parse_cost_mode(std::string_view text) {
  if (text == "unit") return CostMode::kUnit;
  if (text == "inverse-count") return CostMode::kInverseCount;
  if (text == "file") return CostMode::kExplicit;
  throw ConfigError("unknown cost mode '" + std::string(text) + "'");
}

std::optional<CostMatrix> resolve_costs(const TrialConfig& config, const DatasetMeta& meta) {
  if (config.algorithm != Algorithm::kArcsmc) return std::nullopt;
  switch (config.cost_mode) {
    case CostMode::kUnit:
      return CostMatrix::uniform(meta.num_classes());
    case CostMode::kInverseCount: {
      const auto counts = meta.counts_by_class();
      return cost_matrix_from_counts(counts);
    }
    case CostMode::kExplicit:
      if (!config.explicit_costs) throw ConfigError("cost mode 'file' needs a cost matrix");
      return config.explicit_costs;
  }
  return std::nullopt;
}

std::variant<BinaryLearner, MulticlassLearner> make_learner(const TrialConfig& config,
                                                           const DatasetMeta& meta) {
  if (config.task == Task::kBinary) {
    return BinaryLearner(config.algorithm, meta.dim, config.params);
  }
  return MulticlassLearner(config.algorithm, meta.num_classes(), meta.dim, config.params,
                           resolve_costs(config, meta));
}

RunResult run_learner(std::variant<BinaryLearner, MulticlassLearner>& learner,
                      std::span<const LabeledExample> examples, const RunOptions& options,
                      std::span<const std::size_t> order) {
  return std::visit(
      [&](auto& l) { return prequential_run(l, examples, options, order); }, learner);
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::uint64_t order_checksum(std::span<const std::size_t> order) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t v : order) {
    auto x = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::vector<MetricSnapshot> average_curves(const std::vector<std::vector<MetricSnapshot>>& curves) {
  std::vector<MetricSnapshot> out;
  if (curves.empty()) return out;
  const std::size_t len = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != len) throw ConfigError("learning curves have different lengths");
  }
  for (std::size_t s = 0; s < len; ++s) {
    MetricSnapshot m;
    m.round = curves.front()[s].round;
    std::vector<std::optional<double>> err, sens, spec, sum, loss;
    for (const auto& c : curves) {
      err.push_back(c[s].error_rate);
      sens.push_back(c[s].sensitivity);
      spec.push_back(c[s].specificity);
      sum.push_back(c[s].weighted_sum);
      loss.push_back(c[s].cumulative_loss);
    }
    m.error_rate = *summarize(err).mean;
    m.sensitivity = summarize(sens).mean;
    m.specificity = summarize(spec).mean;
    m.weighted_sum = summarize(sum).mean;
    m.cumulative_loss = *summarize(loss).mean;
    const std::size_t k = curves.front()[s].per_class.size();
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::optional<double>> cs, cp, cw;
      for (const auto& curve : curves) {
        cs.push_back(curve[s].per_class[c].sensitivity);
        cp.push_back(curve[s].per_class[c].specificity);
        cw.push_back(curve[s].per_class[c].weighted_sum);
      }
      m.per_class.push_back({summarize(cs).mean, summarize(cp).mean, summarize(cw).mean});
    }
    out.push_back(std::move(m));
  }
  return out;
}

TrialReport trial_suite(const TrialConfig& config, const Dataset& dataset) {
  if (dataset.examples.empty()) throw ConfigError("dataset is empty");
  if (config.trials == 0) throw ConfigError("trials must be at least 1");
  check_labels(dataset, config.task);
  // Fail fast on configuration problems before any trial starts.
  make_learner(config, dataset.meta);

  struct TrialOutput {
    RunResult run;
    std::uint64_t checksum = 0;
  };
  const auto run_trial = [&](std::size_t i) {
    const auto order = shuffled_order(dataset.examples.size(), config.master_seed + i);
    auto learner = make_learner(config, dataset.meta);
    TrialOutput out;
    out.run = run_learner(learner, dataset.examples, config.run, order);
    out.checksum = order_checksum(order);
    return out;
  };

  std::vector<TrialOutput> outputs(config.trials);
  if (config.threads <= 1) {
    for (std::size_t i = 0; i < config.trials; ++i) outputs[i] = run_trial(i);
  } else {
    for (std::size_t begin = 0; begin < config.trials; begin += config.threads) {
      const std::size_t end = std::min(config.trials, begin + config.threads);
      std::vector<std::future<TrialOutput>> pending;
      for (std::size_t i = begin; i < end; ++i) {
        pending.push_back(std::async(std::launch::async, run_trial, i));
      }
      for (std::size_t i = begin; i < end; ++i) outputs[i] = pending[i - begin].get();
    }
  }

  TrialReport report;
  std::vector<std::vector<MetricSnapshot>> curves;
  std::vector<std::optional<double>> err, sens, spec, sum, loss, secs;
  for (std::size_t i = 0; i < config.trials; ++i) {
    const auto& run = outputs[i].run;
    const auto& fin = run.final_snapshot();
    report.finals.push_back(fin);
    report.seeds.push_back(config.master_seed + i);
    report.stream_checksums.push_back(outputs[i].checksum);
    report.trial_seconds.push_back(run.seconds);
    curves.push_back(run.curve);
    err.push_back(fin.error_rate);
    sens.push_back(fin.sensitivity);
    spec.push_back(fin.specificity);
    sum.push_back(fin.weighted_sum);
    loss.push_back(fin.cumulative_loss);
    secs.push_back(run.seconds);
  }
  report.error_rate = summarize(err);
  report.sensitivity = summarize(sens);
  report.specificity = summarize(spec);
  report.weighted_sum = summarize(sum);
  report.cumulative_loss = summarize(loss);
  report.seconds = summarize(secs);

  const std::size_t k = report.finals.front().per_class.size();
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::optional<double>> cs, cp, cw;
    for (const auto& fin : report.finals) {
      cs.push_back(fin.per_class[c].sensitivity);
      cp.push_back(fin.per_class[c].specificity);
      cw.push_back(fin.per_class[c].weighted_sum);
    }
    report.per_class.push_back({summarize(cs), summarize(cp), summarize(cw)});
  }
  report.mean_curve = average_curves(curves);
  return report;
}

std::vector<std::size_t> validation_order(std::size_t n, double validation_fraction) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
  auto order = shuffled_order(n, 0);
  const auto take = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(validation_fraction * static_cast<double>(n))));
  order.resize(std::min(n, take));
  return order;
}

GridResult grid_search(const TrialConfig& config, const Dataset& dataset,
                       std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("grid must not be empty");
  if (dataset.examples.empty()) throw ConfigError("dataset is empty");
  check_labels(dataset, config.task);

  GridResult result;
  result.parameter = tuned_parameter(config.algorithm);
  const bool maximize = is_cost_sensitive(config.algorithm);
  result.criterion = maximize ? "weighted_sum" : "error_rate";

  std::vector<double> values(grid.begin(), grid.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  const auto order = validation_order(dataset.examples.size(), config.validation_fraction);
  result.validation_samples = order.size();

  std::optional<std::size_t> best;
  for (double value : values) {
    GridPoint point;
    point.value = value;
    TrialConfig trial = config;
    if (result.parameter) set_param(trial.params, *result.parameter, value);
    try {
      auto learner = make_learner(trial, dataset.meta);
      const auto run = run_learner(learner, dataset.examples, trial.run, order);
      const auto& fin = run.final_snapshot();
      if (maximize) {
        if (fin.weighted_sum) {
          point.score = *fin.weighted_sum;
        } else {
          point.failure = "weighted sum undefined on the validation prefix";
        }
      } else {
        point.score = fin.error_rate;
      }
    } catch (const Error& e) {
      point.failure = e.what();
    }
    result.points.push_back(point);
    if (!point.score) continue;
    const auto& current = result.points.back();
    if (!best) {
      best = result.points.size() - 1;
    } else {
      const double incumbent = *result.points[*best].score;
      const bool better = maximize ? *current.score > incumbent : *current.score < incumbent;
      if (better) best = result.points.size() - 1;
    }
  }

  if (!best) {
    std::string reasons;
    for (const auto& p : result.points) {
      reasons += "\n  " + std::to_string(p.value) + ": " + p.failure;
    }
    throw ConfigError("every grid point failed:" + reasons);
  }
  result.best_value = result.points[*best].value;
  result.best = config.params;
  if (result.parameter) set_param(result.best, *result.parameter, result.best_value);
  return result;
}

}  // namespace csol
