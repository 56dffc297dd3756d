// Command-line front end: run, bench, tune, gen.

#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "csol/experiment.hpp"

namespace {

struct SyntheticFlags {
  std::string spec_file;
  std::size_t k = 2;
  std::size_t dim = 2;
  std::vector<double> priors;
  double separation = 1.0;
  double noise = 1.0;
  double flip = 0.0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  bool any_inline = false;
};

struct Flags {
  std::string data;
  std::string format = "sparse";
  std::string label_col = "label";
  std::vector<std::string> positive{"attack"};
  std::vector<std::string> classes;
  std::optional<std::size_t> dim;
  std::string task;
  std::vector<std::string> algos{"perceptron"};
  std::size_t trials = 10;
  std::optional<std::uint64_t> seed;
  std::size_t stride = 100;
  double eta_p = 0.5;
  std::vector<double> grid;
  std::string out_dir = ".";
  std::string cov = "diag";
  std::string cost = "inverse-count";
  std::string cost_file;
  double validation = 0.2;
  std::size_t threads = 1;
  bool scale = false;
  csol::Hyperparams params;
  std::optional<double> rho;
  SyntheticFlags syn;
};

void add_synthetic_options(CLI::App* app, SyntheticFlags& s) {
  app->add_option("--synthetic", s.spec_file, "Synthetic spec JSON document");
  const auto mark = [&s](auto&&...) { s.any_inline = true; };
  app->add_option("--syn-k", s.k, "Synthetic: number of classes")->each(mark);
  app->add_option("--syn-dim", s.dim, "Synthetic: feature dimension")->each(mark);
  app->add_option("--syn-priors", s.priors, "Synthetic: class priors")->delimiter(',')->each(mark);
  app->add_option("--syn-separation", s.separation, "Synthetic: std of the class means")->each(mark);
  app->add_option("--syn-noise", s.noise, "Synthetic: noise scale")->each(mark);
  app->add_option("--syn-flip", s.flip, "Synthetic: label flip probability")->each(mark);
  app->add_option("--syn-n", s.n, "Synthetic: sample count")->each(mark);
  app->add_option("--syn-seed", s.seed, "Synthetic: generator seed")->each(mark);
}

std::optional<csol::SyntheticSpec> synthetic_from(const SyntheticFlags& s) {
  if (!s.spec_file.empty()) {
    std::ifstream in(s.spec_file);
    if (!in) throw csol::Error("cannot open '" + s.spec_file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return csol::synthetic_spec_from_json(buf.str());
  }
  if (!s.any_inline) return std::nullopt;
  csol::SyntheticSpec spec;
  spec.num_classes = s.k;
  spec.dim = s.dim;
  spec.priors = s.priors.empty() ? std::vector<double>(s.k, 1.0 / static_cast<double>(s.k)) : s.priors;
  spec.means = csol::random_means(s.k, s.dim, s.separation, s.seed);
  spec.noise = s.noise;
  spec.flip = s.flip;
  spec.samples = s.n;
  spec.seed = s.seed;
  spec.validate();
  return spec;
}

void add_experiment_options(CLI::App* app, Flags& f, bool multi_algo) {
  app->add_option("--data", f.data, "Dataset path");
  app->add_option("--format", f.format, "Dataset format")->check(CLI::IsMember({"csv", "sparse"}));
  app->add_option("--label-col", f.label_col, "CSV label column name");
  app->add_option("--positive", f.positive, "CSV label tokens mapped to +1")->delimiter(',');
  app->add_option("--classes", f.classes, "CSV class mapping token=index,...")->delimiter(',');
  app->add_option("--dim", f.dim, "Declared feature dimension for sparse files");
  app->add_option("--task", f.task, "binary or multiclass (inferred when omitted)")
      ->check(CLI::IsMember({"binary", "multiclass"}));
  auto* algo = app->add_option("--algo", f.algos, multi_algo ? "Algorithms" : "Algorithm")
                   ->delimiter(',');
  if (!multi_algo) algo->expected(1);
  app->add_option("--trials", f.trials, "Shuffled trials")->capture_default_str();
  app->add_option("--seed", f.seed, "Master seed (overrides CSOL_SEED)");
  app->add_option("--stride", f.stride, "Learning-curve stride")->capture_default_str();
  app->add_option("--eta-p", f.eta_p, "Sensitivity weight; specificity gets 1 - eta_p")
      ->capture_default_str();
  app->add_option("--grid", f.grid, "Grid for the tuned parameter")->delimiter(',');
  app->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
  app->add_option("--cov", f.cov, "Covariance mode")->check(CLI::IsMember({"diag", "full"}));
  app->add_option("--cost", f.cost, "ARCSMC cost matrix source")
      ->check(CLI::IsMember({"unit", "inverse-count", "file"}));
  app->add_option("--cost-file", f.cost_file, "k×k cost matrix for --cost file");
  app->add_option("--validation", f.validation, "Validation prefix fraction")->capture_default_str();
  app->add_option("--threads", f.threads, "Concurrent trials")->capture_default_str();
  app->add_flag("--scale", f.scale, "Min-max scale features (fit on the validation prefix)");
  app->add_option("--C", f.params.C, "PA-I / SCW aggressiveness, ALMA step scale");
  app->add_option("--gamma", f.params.gamma, "AROW / ARCSOGD / ARCSMC regularizer");
  app->add_option("--lambda", f.params.lambda, "OGD / CSOGD learning rate");
  app->add_option("--rho", f.rho, "Cost-sensitive imbalance weight (default: running ratio)");
  app->add_option("--eta", f.params.eta, "CW / SCW confidence in (0.5, 1)");
  app->add_option("--alma-alpha", f.params.alma_alpha, "ALMA margin parameter in (0, 1]");
  app->add_flag("--literal-label-scaling", f.params.literal_label_scaling,
                "Scale ARCSMC updates by the class index");
  add_synthetic_options(app, f.syn);
}

csol::ExperimentConfig build_config(const Flags& f) {
  csol::ExperimentConfig c;
  c.data.path = f.data;
  c.data.format = f.format == "csv" ? csol::DataFormat::kCsv : csol::DataFormat::kSparse;
  c.data.schema.label_column = f.label_col;
  c.data.schema.positive_tokens = std::set<std::string>(f.positive.begin(), f.positive.end());
  for (const auto& entry : f.classes) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw csol::ConfigError("--classes expects token=index");
    c.data.schema.class_mapping[entry.substr(0, eq)] = std::stoi(entry.substr(eq + 1));
  }
  c.data.dim = f.dim;
  c.data.synthetic = synthetic_from(f.syn);
  c.data.scale = f.scale;
  if (!f.data.empty() && c.data.synthetic) {
    throw csol::ConfigError("pass either --data or synthetic options, not both");
  }
  if (!f.task.empty()) c.task = csol::parse_task(f.task);
  c.algorithms.clear();
  for (const auto& a : f.algos) c.algorithms.push_back(csol::parse_algorithm(a));
  c.trial.params = f.params;
  c.trial.params.rho = f.rho;
  c.trial.params.covariance = csol::parse_covariance_mode(f.cov);
  c.trial.trials = f.trials;
  c.trial.master_seed = csol::resolve_seed(f.seed);
  c.trial.run.curve_stride = f.stride;
  c.trial.run.eta_p = f.eta_p;
  c.trial.run.eta_n = 1.0 - f.eta_p;
  c.trial.cost_mode = csol::parse_cost_mode(f.cost);
  c.trial.validation_fraction = f.validation;
  c.trial.threads = f.threads;
  c.cost_file = f.cost_file;
  c.grid = f.grid;
  c.out_dir = f.out_dir;
  if (c.trial.trials == 0) throw csol::ConfigError("--trials must be at least 1");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online linear classifiers and prequential evaluation for imbalanced streams"};
  app.require_subcommand(1);

  Flags run_flags, bench_flags, tune_flags;
  auto* run = app.add_subcommand("run", "Run the shuffled trial protocol for one algorithm");
  add_experiment_options(run, run_flags, false);
  auto* bench = app.add_subcommand("bench", "Compare algorithms on paired shuffles");
  add_experiment_options(bench, bench_flags, true);
  auto* tune = app.add_subcommand("tune", "Grid-search the tuned parameter on a validation prefix");
  add_experiment_options(tune, tune_flags, false);

  SyntheticFlags gen_flags;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a synthetic imbalanced stream in sparse format");
  add_synthetic_options(gen, gen_flags);
  gen->add_option("--out", gen_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto paths = csol::cmd_run(build_config(run_flags));
      std::cout << "wrote " << paths.summary_path << ", " << paths.curve_path << ", "
                << paths.timing_path << "\n";
    } else if (bench->parsed()) {
      const auto config = build_config(bench_flags);
      const auto rows = csol::cmd_bench(config);
      int failures = 0;
      for (const auto& row : rows) {
        if (!row.report) {
          ++failures;
          std::cerr << csol::to_string(row.algorithm) << ": " << row.error << "\n";
        }
      }
      std::cout << "wrote " << config.out_dir << "/bench.csv and bench.json\n";
      return failures == 0 ? 0 : 2;
    } else if (tune->parsed()) {
      const auto result = csol::cmd_tune(build_config(tune_flags));
      if (result.parameter) {
        std::cout << csol::to_string(*result.parameter) << " = " << result.best_value << "\n";
      } else {
        std::cout << "algorithm has no tuned parameter\n";
      }
    } else if (gen->parsed()) {
      auto spec = synthetic_from(gen_flags);
      if (!spec) {
        gen_flags.any_inline = true;
        spec = synthetic_from(gen_flags);
      }
      const auto data = csol::cmd_gen(*spec, gen_out);
      std::cout << "wrote " << data.meta.samples << " samples to " << gen_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
