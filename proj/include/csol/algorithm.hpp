#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "csol/core.hpp"

namespace csol {

enum class Algorithm {
  kPerceptron,
  kAlma,
  kRomma,
  kOgd,
  kPa,
  kPaI,
  kCw,
  kArow,
  kScw,
  kCsogd,
  kArcsogd,
  kArcsmc,
};

std::string_view to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

bool supports_binary(Algorithm algo);
bool supports_multiclass(Algorithm algo);
bool is_cost_sensitive(Algorithm algo);
bool is_second_order(Algorithm algo);

/// The single hyperparameter tuned by grid search for each algorithm.
enum class TunedParam { kC, kGamma, kLambda, kEta };

std::string_view to_string(TunedParam param);
std::optional<TunedParam> tuned_parameter(Algorithm algo);
double get_param(const Hyperparams& params, TunedParam which);
void set_param(Hyperparams& params, TunedParam which, double value);

/// Grid used when none is supplied: the paper-standard decades for
/// unbounded parameters, confidence probabilities for CW.
std::vector<double> default_grid(Algorithm algo);

/// Per-algorithm validation of the hyperparameters it reads.
void validate(Algorithm algo, const Hyperparams& params);

}  // namespace csol
