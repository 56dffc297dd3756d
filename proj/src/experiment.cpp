#include "csol/experiment.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace csol {
namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string out_path(const ExperimentConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  return (std::filesystem::path(config.out_dir) / name).string();
}

TrialConfig trial_for(const ExperimentConfig& config, Algorithm algo, Task task) {
  TrialConfig trial = config.trial;
  trial.algorithm = algo;
  trial.task = task;
  if (trial.cost_mode == CostMode::kExplicit && !trial.explicit_costs) {
    if (config.cost_file.empty()) throw ConfigError("cost mode 'file' needs --cost-file");
    trial.explicit_costs = load_cost_matrix(config.cost_file);
  }
  return trial;
}

// Applies grid selection when a grid is configured.
std::optional<GridResult> maybe_tune(TrialConfig& trial, const ExperimentConfig& config,
                                     const Dataset& data) {
  if (config.grid.empty() || !tuned_parameter(trial.algorithm)) return std::nullopt;
  auto result = grid_search(trial, data, config.grid);
  trial.params = result.best;
  return result;
}

ojson grid_json(const GridResult& g) {
  ojson j;
  j["parameter"] = g.parameter ? ojson(std::string(to_string(*g.parameter))) : ojson(nullptr);
  j["criterion"] = g.criterion;
  j["validation_samples"] = g.validation_samples;
  j["selected"] = g.parameter ? ojson(g.best_value) : ojson(nullptr);
  ojson points = ojson::array();
  for (const auto& p : g.points) {
    ojson pj;
    pj["value"] = p.value;
    pj["score"] = opt(p.score);
    if (!p.failure.empty()) pj["failure"] = p.failure;
    points.push_back(pj);
  }
  j["points"] = points;
  return j;
}

std::string csv_header_comment(const ojson& config) { return "# config=" + config.dump() + "\n"; }

}  // namespace

Task infer_task(const Dataset& data) {
  for (const auto& ex : data.examples) {
    if (ex.label != 1 && ex.label != -1) return Task::kMulticlass;
  }
  return Task::kBinary;
}

Dataset load_dataset(const ExperimentConfig& config, Task& task) {
  Dataset data;
  if (config.data.synthetic) {
    data = generate_synthetic(*config.data.synthetic);
  } else if (config.data.path.empty()) {
    throw ConfigError("no data source: pass --data or synthetic options");
  } else if (config.data.format == DataFormat::kCsv) {
    CsvSchema schema = config.data.schema;
    if (config.task) schema.task = *config.task;
    data = load_csv(config.data.path, schema);
  } else {
    data = load_sparse(config.data.path, config.data.dim);
  }
  if (data.examples.empty()) throw ConfigError("dataset is empty");
  task = config.task ? *config.task : infer_task(data);
  check_labels(data, task);
  if (config.data.scale) {
    const auto order = validation_order(data.examples.size(), config.trial.validation_fraction);
    std::vector<LabeledExample> prefix;
    for (auto i : order) prefix.push_back(data.examples[i]);
    MinMaxScaler scaler;
    scaler.fit(prefix);
    data.examples = scaler.transform(data.examples);
  }
  return data;
}

ojson to_json(const Hyperparams& p) {
  ojson j;
  j["C"] = p.C;
  j["gamma"] = p.gamma;
  j["lambda"] = p.lambda;
  j["rho"] = p.rho ? ojson(*p.rho) : ojson("running");
  j["eta"] = p.eta;
  j["alma_alpha"] = p.alma_alpha;
  j["covariance"] = std::string(to_string(p.covariance));
  j["literal_label_scaling"] = p.literal_label_scaling;
  return j;
}

ojson to_json(const ExperimentConfig& c) {
  ojson j;
  ojson data;
  if (c.data.synthetic) {
    data["source"] = "synthetic";
    data["spec"] = ojson::parse(synthetic_spec_to_json(*c.data.synthetic));
  } else {
    data["source"] = c.data.path;
    data["format"] = c.data.format == DataFormat::kCsv ? "csv" : "sparse";
    if (c.data.format == DataFormat::kCsv) {
      data["label_column"] = c.data.schema.label_column;
      data["positive"] = c.data.schema.positive_tokens;
      data["classes"] = c.data.schema.class_mapping;
    }
    if (c.data.dim) data["dim"] = *c.data.dim;
  }
  data["scale"] = c.data.scale;
  j["data"] = data;
  ojson algos = ojson::array();
  for (auto a : c.algorithms) algos.push_back(std::string(to_string(a)));
  j["algorithms"] = algos;
  j["task"] = c.task ? ojson(std::string(to_string(*c.task))) : ojson("auto");
  j["params"] = to_json(c.trial.params);
  j["trials"] = c.trial.trials;
  j["master_seed"] = c.trial.master_seed;
  j["stride"] = c.trial.run.curve_stride;
  j["eta_p"] = c.trial.run.eta_p;
  j["eta_n"] = c.trial.run.eta_n;
  j["cost"] = std::string(to_string(c.trial.cost_mode));
  if (!c.cost_file.empty()) j["cost_file"] = c.cost_file;
  j["validation_fraction"] = c.trial.validation_fraction;
  j["grid"] = c.grid;
  return j;
}

ojson to_json(const MetricSummary& s) {
  ojson j;
  j["mean"] = opt(s.mean);
  j["std"] = opt(s.stddev);
  j["defined"] = s.defined;
  return j;
}

ojson to_json(const MetricSnapshot& s) {
  ojson j;
  j["round"] = s.round;
  j["error_rate"] = s.error_rate;
  j["sensitivity"] = opt(s.sensitivity);
  j["specificity"] = opt(s.specificity);
  j["sum"] = opt(s.weighted_sum);
  j["cumulative_loss"] = s.cumulative_loss;
  if (!s.per_class.empty()) {
    ojson pc = ojson::array();
    for (std::size_t c = 0; c < s.per_class.size(); ++c) {
      ojson cj;
      cj["class"] = c + 1;
      cj["sensitivity"] = opt(s.per_class[c].sensitivity);
      cj["specificity"] = opt(s.per_class[c].specificity);
      cj["sum"] = opt(s.per_class[c].weighted_sum);
      pc.push_back(cj);
    }
    j["per_class"] = pc;
  }
  return j;
}

ojson summary_json(const TrialReport& r) {
  ojson j;
  ojson metrics;
  metrics["error_rate"] = to_json(r.error_rate);
  metrics["sensitivity"] = to_json(r.sensitivity);
  metrics["specificity"] = to_json(r.specificity);
  metrics["sum"] = to_json(r.weighted_sum);
  metrics["cumulative_loss"] = to_json(r.cumulative_loss);
  j["metrics"] = metrics;
  if (!r.per_class.empty()) {
    ojson pc = ojson::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
      ojson cj;
      cj["class"] = c + 1;
      cj["sensitivity"] = to_json(r.per_class[c].sensitivity);
      cj["specificity"] = to_json(r.per_class[c].specificity);
      cj["sum"] = to_json(r.per_class[c].weighted_sum);
      pc.push_back(cj);
    }
    j["per_class"] = pc;
  }
  j["final_round"] = r.finals.empty() ? 0 : r.finals.front().round;
  ojson trials = ojson::array();
  for (std::size_t i = 0; i < r.finals.size(); ++i) {
    ojson tj;
    tj["seed"] = r.seeds[i];
    tj["stream_checksum"] = hex(r.stream_checksums[i]);
    tj["final"] = to_json(r.finals[i]);
    trials.push_back(tj);
  }
  j["trials"] = trials;
  return j;
}

std::string curve_csv(const TrialReport& report, const ojson& config) {
  std::string out = csv_header_comment(config);
  out += "round,error_rate,sensitivity,specificity,sum";
  const std::size_t k = report.per_class.size();
  for (std::size_t c = 1; c <= k; ++c) {
    const auto s = std::to_string(c);
    out += ",sensitivity_c" + s + ",specificity_c" + s + ",sum_c" + s;
  }
  out += '\n';
  for (const auto& snap : report.mean_curve) {
    out += std::to_string(snap.round) + ',' + fmt(snap.error_rate) + ',' + fmt(snap.sensitivity) +
           ',' + fmt(snap.specificity) + ',' + fmt(snap.weighted_sum);
    for (const auto& pc : snap.per_class) {
      out += ',' + fmt(pc.sensitivity) + ',' + fmt(pc.specificity) + ',' + fmt(pc.weighted_sum);
    }
    out += '\n';
  }
  return out;
}

RunArtifacts cmd_run(const ExperimentConfig& config) {
  if (config.algorithms.size() != 1) throw ConfigError("run takes exactly one algorithm");
  Task task;
  const Dataset data = load_dataset(config, task);
  TrialConfig trial = trial_for(config, config.algorithms.front(), task);
  const auto tuned = maybe_tune(trial, config, data);
  const TrialReport report = trial_suite(trial, data);

  ojson cfg = to_json(config);
  cfg["task"] = std::string(to_string(task));
  ojson summary;
  summary["config"] = cfg;
  summary["master_seed"] = trial.master_seed;
  summary["algorithm"] = std::string(to_string(trial.algorithm));
  summary["resolved_params"] = to_json(trial.params);
  if (tuned) summary["tuning"] = grid_json(*tuned);
  summary["samples"] = data.meta.samples;
  summary["dim"] = data.meta.dim;
  ojson counts;
  for (const auto& [label, n] : data.meta.class_counts) counts[std::to_string(label)] = n;
  summary["class_counts"] = counts;
  const ojson body = summary_json(report);
  for (const auto& [key, value] : body.items()) summary[key] = value;
  summary["curve_file"] = "curve.csv";
  summary["timing_file"] = "timing.json";

  ojson timing;
  timing["config"] = cfg;
  timing["master_seed"] = trial.master_seed;
  timing["seconds"] = to_json(report.seconds);
  timing["per_trial"] = report.trial_seconds;

  RunArtifacts paths{out_path(config, "summary.json"), out_path(config, "curve.csv"),
                     out_path(config, "timing.json")};
  write_file(paths.summary_path, summary.dump(2) + "\n");
  write_file(paths.curve_path, curve_csv(report, cfg));
  write_file(paths.timing_path, timing.dump(2) + "\n");
  return paths;
}

std::vector<BenchRow> cmd_bench(const ExperimentConfig& config) {
  if (config.algorithms.empty()) throw ConfigError("bench needs at least one algorithm");
  Task task;
  const Dataset data = load_dataset(config, task);
  ojson cfg = to_json(config);
  cfg["task"] = std::string(to_string(task));

  std::vector<BenchRow> rows;
  std::size_t k = 0;
  ojson results = ojson::array();
  for (Algorithm algo : config.algorithms) {
    BenchRow row{algo, std::nullopt, {}};
    ojson rj;
    rj["algorithm"] = std::string(to_string(algo));
    try {
      TrialConfig trial = trial_for(config, algo, task);
      const auto tuned = maybe_tune(trial, config, data);
      row.report = trial_suite(trial, data);
      k = std::max(k, row.report->per_class.size());
      rj["resolved_params"] = to_json(trial.params);
      if (tuned) rj["tuning"] = grid_json(*tuned);
      const ojson body = summary_json(*row.report);
      for (const auto& [key, value] : body.items()) rj[key] = value;
      rj["seconds"] = to_json(row.report->seconds);
    } catch (const Error& e) {
      row.error = e.what();
      rj["error"] = row.error;
    }
    results.push_back(rj);
    rows.push_back(std::move(row));
  }

  std::string csv = csv_header_comment(cfg);
  csv += "algorithm,error_rate_mean,error_rate_std,sensitivity_mean,sensitivity_std,"
         "specificity_mean,specificity_std,sum_mean,sum_std,time_mean,time_std";
  for (std::size_t c = 1; c <= k; ++c) {
    const auto s = std::to_string(c);
    for (const char* m : {"sensitivity", "specificity", "sum"}) {
      csv += std::string(",") + m + "_c" + s + "_mean," + m + "_c" + s + "_std";
    }
  }
  csv += ",status\n";
  for (const auto& row : rows) {
    csv += std::string(to_string(row.algorithm));
    if (row.report) {
      const auto& r = *row.report;
      for (const auto* s : {&r.error_rate, &r.sensitivity, &r.specificity, &r.weighted_sum,
                            &r.seconds}) {
        csv += ',' + fmt(s->mean) + ',' + fmt(s->stddev);
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (c < r.per_class.size()) {
          for (const auto* s : {&r.per_class[c].sensitivity, &r.per_class[c].specificity,
                                &r.per_class[c].weighted_sum}) {
            csv += ',' + fmt(s->mean) + ',' + fmt(s->stddev);
          }
        } else {
          csv += ",,,,,,";
        }
      }
      csv += ",ok\n";
    } else {
      csv += std::string(10 + 6 * k, ',');
      std::string msg = row.error;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      csv += ",error: " + msg + "\n";
    }
  }

  ojson bench;
  bench["config"] = cfg;
  bench["master_seed"] = config.trial.master_seed;
  bench["results"] = results;
  write_file(out_path(config, "bench.csv"), csv);
  write_file(out_path(config, "bench.json"), bench.dump(2) + "\n");
  return rows;
}

GridResult cmd_tune(const ExperimentConfig& config) {
  if (config.algorithms.size() != 1) throw ConfigError("tune takes exactly one algorithm");
  Task task;
  const Dataset data = load_dataset(config, task);
  const TrialConfig trial = trial_for(config, config.algorithms.front(), task);
  const auto grid = config.grid.empty() ? default_grid(trial.algorithm) : config.grid;
  const GridResult result = grid_search(trial, data, grid);

  ojson cfg = to_json(config);
  cfg["task"] = std::string(to_string(task));
  cfg["grid"] = grid;
  ojson j;
  j["config"] = cfg;
  j["master_seed"] = trial.master_seed;
  j["algorithm"] = std::string(to_string(trial.algorithm));
  const ojson body = grid_json(result);
  for (const auto& [key, value] : body.items()) j[key] = value;
  j["best_params"] = to_json(result.best);
  write_file(out_path(config, "tune.json"), j.dump(2) + "\n");
  return result;
}

Dataset cmd_gen(const SyntheticSpec& spec, const std::string& out) {
  Dataset data = generate_synthetic(spec);
  const auto parent = std::filesystem::path(out).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  save_sparse(out, data.examples);
  ojson meta;
  meta["spec"] = ojson::parse(synthetic_spec_to_json(spec));
  meta["master_seed"] = spec.seed;
  meta["samples"] = data.meta.samples;
  meta["dim"] = data.meta.dim;
  ojson counts;
  for (const auto& [label, n] : data.meta.class_counts) counts[std::to_string(label)] = n;
  meta["class_counts"] = counts;
  write_file(out + ".json", meta.dump(2) + "\n");
  return data;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
    std::uint64_t value = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ConfigError(std::string(kSeedEnvVar) + " must be a non-negative integer");
    }
    return value;
  }
  return 0;
}

}  // namespace csol
