#include "csol/algorithm.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace csol {
namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 12> kNames{{
    {Algorithm::kPerceptron, "perceptron"},
    {Algorithm::kAlma, "alma"},
    {Algorithm::kRomma, "romma"},
    {Algorithm::kOgd, "ogd"},
    {Algorithm::kPa, "pa"},
    {Algorithm::kPaI, "pa1"},
    {Algorithm::kCw, "cw"},
    {Algorithm::kArow, "arow"},
    {Algorithm::kScw, "scw"},
    {Algorithm::kCsogd, "csogd"},
    {Algorithm::kArcsogd, "arcsogd"},
    {Algorithm::kArcsmc, "arcsmc"},
}};

void require_positive(double value, const char* name) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw ConfigError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(Algorithm algo) {
  for (const auto& [a, name] : kNames) {
    if (a == algo) return name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kNames) {
    if (n == name) return a;
  }
  if (name == "pa-i" || name == "pai") return Algorithm::kPaI;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

bool supports_binary(Algorithm algo) { return algo != Algorithm::kArcsmc; }

bool supports_multiclass(Algorithm algo) {
  switch (algo) {
    case Algorithm::kPerceptron:
    case Algorithm::kRomma:
    case Algorithm::kOgd:
    case Algorithm::kPaI:
    case Algorithm::kArow:
    case Algorithm::kScw:
    case Algorithm::kArcsmc:
      return true;
    default:
      return false;
  }
}

bool is_cost_sensitive(Algorithm algo) {
  return algo == Algorithm::kCsogd || algo == Algorithm::kArcsogd || algo == Algorithm::kArcsmc;
}

bool is_second_order(Algorithm algo) {
  switch (algo) {
    case Algorithm::kCw:
    case Algorithm::kArow:
    case Algorithm::kScw:
    case Algorithm::kArcsogd:
    case Algorithm::kArcsmc:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(TunedParam param) {
  switch (param) {
    case TunedParam::kC: return "C";
    case TunedParam::kGamma: return "gamma";
    case TunedParam::kLambda: return "lambda";
    case TunedParam::kEta: return "eta";
  }
  return "unknown";
}

std::optional<TunedParam> tuned_parameter(Algorithm algo) {
  switch (algo) {
    case Algorithm::kPerceptron:
    case Algorithm::kRomma:
    case Algorithm::kPa:
      return std::nullopt;
    case Algorithm::kAlma:
    case Algorithm::kPaI:
    case Algorithm::kScw:
      return TunedParam::kC;
    case Algorithm::kOgd:
    case Algorithm::kCsogd:
      return TunedParam::kLambda;
    case Algorithm::kCw:
      return TunedParam::kEta;
    case Algorithm::kArow:
    case Algorithm::kArcsogd:
    case Algorithm::kArcsmc:
      return TunedParam::kGamma;
  }
  return std::nullopt;
}

double get_param(const Hyperparams& params, TunedParam which) {
  switch (which) {
    case TunedParam::kC: return params.C;
    case TunedParam::kGamma: return params.gamma;
    case TunedParam::kLambda: return params.lambda;
    case TunedParam::kEta: return params.eta;
  }
  return 0.0;
}

void set_param(Hyperparams& params, TunedParam which, double value) {
  switch (which) {
    case TunedParam::kC: params.C = value; break;
    case TunedParam::kGamma: params.gamma = value; break;
    case TunedParam::kLambda: params.lambda = value; break;
    case TunedParam::kEta: params.eta = value; break;
  }
}

std::vector<double> default_grid(Algorithm algo) {
  if (tuned_parameter(algo) == TunedParam::kEta) {
    return {0.55, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
  }
  return {0.001, 0.01, 0.1, 1, 10, 100, 1000};
}

void validate(Algorithm algo, const Hyperparams& params) {
  switch (algo) {
    case Algorithm::kAlma:
      require_positive(params.C, "C");
      if (!(params.alma_alpha > 0.0 && params.alma_alpha <= 1.0)) {
        throw ConfigError("ALMA alpha must lie in (0, 1]");
      }
      break;
    case Algorithm::kPaI:
      require_positive(params.C, "C");
      break;
    case Algorithm::kOgd:
      require_positive(params.lambda, "lambda");
      break;
    case Algorithm::kCsogd:
      require_positive(params.lambda, "lambda");
      if (params.rho) require_positive(*params.rho, "rho");
      break;
    case Algorithm::kArcsogd:
      require_positive(params.gamma, "gamma");
      if (params.rho) require_positive(*params.rho, "rho");
      break;
    case Algorithm::kArow:
    case Algorithm::kArcsmc:
      require_positive(params.gamma, "gamma");
      break;
    case Algorithm::kScw:
      require_positive(params.C, "C");
      [[fallthrough]];
    case Algorithm::kCw:
      if (!(params.eta > 0.5 && params.eta < 1.0)) {
        throw ConfigError("eta must lie in (0.5, 1)");
      }
      break;
    case Algorithm::kPerceptron:
    case Algorithm::kRomma:
    case Algorithm::kPa:
      break;
  }
}

}  // namespace csol
