#pragma once

// Prequential (test-then-train) evaluation, imbalance-aware metrics, the
// shuffled multi-trial protocol, and validation-prefix grid search.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "csol/algorithm.hpp"
#include "csol/binary_learners.hpp"
#include "csol/data.hpp"
#include "csol/multiclass_learners.hpp"

namespace csol {

/// Positive class is +1.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  void add(int truth, int predicted);
  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// k×k counts, rows indexed by true class, columns by predicted class.
class MulticlassCounts {
 public:
  MulticlassCounts() = default;
  explicit MulticlassCounts(std::size_t num_classes);

  void add(int truth, int predicted);
  std::uint64_t at(int truth, int predicted) const;
  std::size_t num_classes() const { return k_; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  /// Collapses to binary counts with `target` (1..k) as the positive class.
  ConfusionCounts one_vs_rest(int target) const;

  static MulticlassCounts from_rows(const std::vector<std::vector<std::uint64_t>>& rows);
  bool operator==(const MulticlassCounts&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// TP/(TP+FN); nullopt when there are no positives.
std::optional<double> sensitivity(const ConfusionCounts& c);
/// TN/(TN+FP); nullopt when there are no negatives.
std::optional<double> specificity(const ConfusionCounts& c);

/// η_p·sens + η_n·spec. The weights must be non-negative and sum to 1.
double weighted_sum(double sens, double spec, double eta_p, double eta_n);
std::optional<double> weighted_sum(std::optional<double> sens, std::optional<double> spec,
                                   double eta_p, double eta_n);

struct ClassMetrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> weighted_sum;
  bool operator==(const ClassMetrics&) const = default;
};

ClassMetrics one_vs_rest_metrics(const MulticlassCounts& counts, int target_class,
                                 double eta_p = 0.5, double eta_n = 0.5);

struct MetricSnapshot {
  std::size_t round = 0;
  double error_rate = 0.0;
  // Binary: metrics of the +1 class. Multiclass: mean of the defined
  // one-vs-rest values.
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> weighted_sum;
  double cumulative_loss = 0.0;
  std::vector<ClassMetrics> per_class;  // multiclass only
  bool operator==(const MetricSnapshot&) const = default;
};

MetricSnapshot snapshot(std::size_t round, const ConfusionCounts& counts, double cumulative_loss,
                        double eta_p, double eta_n);
MetricSnapshot snapshot(std::size_t round, const MulticlassCounts& counts,
                        double cumulative_loss, double eta_p, double eta_n);

struct RunOptions {
  std::size_t curve_stride = 100;
  double eta_p = 0.5;
  double eta_n = 0.5;
};

struct RunResult {
  std::vector<MetricSnapshot> curve;  // every stride rounds, plus the last round
  ConfusionCounts binary_counts;
  MulticlassCounts multiclass_counts;
  double seconds = 0.0;  // predict + update time only

  const MetricSnapshot& final_snapshot() const { return curve.back(); }
};

/// Feeds `examples` in the given order (natural order when `order` is
/// empty): predict, record against the truth, then learn.
RunResult prequential_run(BinaryLearner& learner, std::span<const LabeledExample> examples,
                          const RunOptions& options = {},
                          std::span<const std::size_t> order = {});
RunResult prequential_run(MulticlassLearner& learner, std::span<const LabeledExample> examples,
                          const RunOptions& options = {},
                          std::span<const std::size_t> order = {});

enum class CostMode { kUnit, kInverseCount, kExplicit };

std::string_view to_string(CostMode mode);
CostMode parse_cost_mode(std::string_view text);

struct TrialConfig {
  Algorithm algorithm = Algorithm::kPerceptron;
  Hyperparams params;
  Task task = Task::kBinary;
  std::size_t trials = 10;
  std::uint64_t master_seed = 0;
  RunOptions run;
  CostMode cost_mode = CostMode::kInverseCount;
  std::optional<CostMatrix> explicit_costs;
  double validation_fraction = 0.2;
  std::size_t threads = 1;
};

/// Cost matrix an ARCSMC learner would get for `meta`; nullopt for
/// algorithms that take none.
std::optional<CostMatrix> resolve_costs(const TrialConfig& config, const DatasetMeta& meta);

/// Fresh binary or multiclass learner for the configured task.
std::variant<BinaryLearner, MulticlassLearner> make_learner(const TrialConfig& config,
                                                           const DatasetMeta& meta);

RunResult run_learner(std::variant<BinaryLearner, MulticlassLearner>& learner,
                      std::span<const LabeledExample> examples, const RunOptions& options,
                      std::span<const std::size_t> order = {});

/// Seeded Fisher-Yates permutation of 0..n-1 (std::shuffle on mt19937_64).
std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed);
/// FNV-1a over the permutation; equal checksums mean identical streams.
std::uint64_t order_checksum(std::span<const std::size_t> order);

struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> stddev;  // population estimator
  std::size_t defined = 0;       // trials contributing
  bool operator==(const MetricSummary&) const = default;
};

/// Mean and population std over the defined values.
MetricSummary summarize(std::span<const std::optional<double>> values);

struct ClassSummary {
  MetricSummary sensitivity;
  MetricSummary specificity;
  MetricSummary weighted_sum;
  bool operator==(const ClassSummary&) const = default;
};

struct TrialReport {
  MetricSummary error_rate;
  MetricSummary sensitivity;
  MetricSummary specificity;
  MetricSummary weighted_sum;
  MetricSummary cumulative_loss;
  std::vector<ClassSummary> per_class;
  std::vector<MetricSnapshot> finals;       // one per trial
  std::vector<MetricSnapshot> mean_curve;   // per-snapshot mean across trials
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> stream_checksums;
  std::vector<double> trial_seconds;
  MetricSummary seconds;
};

/// Mean across trials of each snapshot position (undefined values skipped).
std::vector<MetricSnapshot> average_curves(const std::vector<std::vector<MetricSnapshot>>& curves);

/// Trial i shuffles with seed master_seed + i and runs a fresh learner.
TrialReport trial_suite(const TrialConfig& config, const Dataset& dataset);

struct GridPoint {
  double value = 0.0;
  std::optional<double> score;
  std::string failure;  // empty when the point evaluated cleanly
};

struct GridResult {
  std::optional<TunedParam> parameter;
  std::string criterion;  // "error_rate" (minimized) or "weighted_sum" (maximized)
  double best_value = 0.0;
  Hyperparams best;
  std::vector<GridPoint> points;  // sorted, duplicates removed
  std::size_t validation_samples = 0;
};

/// First `validation_fraction` of a seed-0 shuffle.
std::vector<std::size_t> validation_order(std::size_t n, double validation_fraction);

/// Evaluates every grid value of the algorithm's tuned parameter with a
/// prequential pass over the validation prefix. Ties go to the smaller
/// value.
GridResult grid_search(const TrialConfig& config, const Dataset& dataset,
                       std::span<const double> grid);

}  // namespace csol
