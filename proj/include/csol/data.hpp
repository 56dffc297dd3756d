#pragma once

// Dataset ingestion (CSV with a named label column, sparse "label idx:val"
// text), cost matrices derived from class counts, a min-max scaler, and a
// seeded generator of imbalanced Gaussian streams.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "csol/core.hpp"

namespace csol {

enum class Task { kBinary, kMulticlass };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

struct DatasetMeta {
  std::size_t samples = 0;
  std::size_t dim = 0;
  std::map<int, std::size_t> class_counts;  // label -> count
  std::string source;

  /// Multiclass: k is the largest class label.
  std::size_t num_classes() const;
  /// Counts for classes 1..k in order, zero for absent classes.
  std::vector<std::size_t> counts_by_class() const;
  bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<LabeledExample> examples;
};

/// Recomputes sample count, dimension and class counts from `examples`.
DatasetMeta describe(std::span<const LabeledExample> examples, std::size_t dim,
                     std::string source);

/// Throws ConfigError when labels do not fit the task (±1 for binary,
/// 1..k for multiclass).
void check_labels(const Dataset& data, Task task);

struct CsvSchema {
  std::string label_column = "label";
  Task task = Task::kBinary;
  /// Binary mode: these label tokens map to +1, everything else to −1.
  std::set<std::string> positive_tokens;
  /// Multiclass mode: token -> class index. When empty, distinct tokens are
  /// numbered 1..k in sorted order (numerically if all are integers).
  std::map<std::string, int> class_mapping;
};

Dataset read_csv(std::istream& in, const CsvSchema& schema, const std::string& source = "<stream>");
Dataset load_csv(const std::string& path, const CsvSchema& schema);

/// `dim` overrides the file-wide maximum index when given; it must not be
/// smaller than that maximum.
Dataset read_sparse(std::istream& in, std::optional<std::size_t> dim = std::nullopt,
                    const std::string& source = "<stream>");
Dataset load_sparse(const std::string& path, std::optional<std::size_t> dim = std::nullopt);

/// Shortest round-trip formatting; reloading reproduces values exactly.
void write_sparse(std::ostream& out, std::span<const LabeledExample> examples);
void save_sparse(const std::string& path, std::span<const LabeledExample> examples);

/// c(i, j) = n_max / n_i off the diagonal.
CostMatrix cost_matrix_from_counts(std::span<const std::size_t> counts);

/// Reads a k×k cost matrix from comma or whitespace separated rows.
CostMatrix load_cost_matrix(const std::string& path);

struct SyntheticSpec {
  std::size_t num_classes = 2;
  std::size_t dim = 2;
  std::vector<double> priors;
  std::vector<std::vector<double>> means;
  double noise = 1.0;
  double flip = 0.0;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

/// Class means drawn i.i.d. from N(0, separation²), deterministic in seed.
std::vector<std::vector<double>> random_means(std::size_t num_classes, std::size_t dim,
                                              double separation, std::uint64_t seed);

std::string synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const std::string& text);

/// Two-class specs emit binary labels (class 1 -> −1, class 2 -> +1);
/// larger k emits class indices 1..k. Features are the class mean plus
/// `noise`-scaled standard normal noise; labels are then replaced by a
/// uniformly drawn different class with probability `flip`.
Dataset generate_synthetic(const SyntheticSpec& spec);

class MinMaxScaler {
 public:
  void fit(std::span<const LabeledExample> examples);
  LabeledExample transform(const LabeledExample& ex) const;
  std::vector<LabeledExample> transform(std::span<const LabeledExample> examples) const;
  bool fitted() const { return !lo_.empty(); }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

}  // namespace csol
