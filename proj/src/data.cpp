#include "csol/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace csol {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(unquote(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string_view to_string(Task task) {
  return task == Task::kBinary ? "binary" : "multiclass";
}

Task parse_task(std::string_view text) {
  if (text == "binary") return Task::kBinary;
  if (text == "multiclass") return Task::kMulticlass;
  throw ConfigError("unknown task '" + std::string(text) + "'");
}

std::size_t DatasetMeta::num_classes() const {
  if (class_counts.empty()) return 0;
  return static_cast<std::size_t>(std::max(0, class_counts.rbegin()->first));
}

std::vector<std::size_t> DatasetMeta::counts_by_class() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (const auto& [label, count] : class_counts) {
    if (label >= 1) counts[static_cast<std::size_t>(label - 1)] = count;
  }
  return counts;
}

DatasetMeta describe(std::span<const LabeledExample> examples, std::size_t dim,
                     std::string source) {
  DatasetMeta meta;
  meta.samples = examples.size();
  meta.dim = dim;
  meta.source = std::move(source);
  for (const auto& ex : examples) ++meta.class_counts[ex.label];
  return meta;
}

void check_labels(const Dataset& data, Task task) {
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    const int label = data.examples[i].label;
    const bool ok = task == Task::kBinary ? (label == 1 || label == -1) : label >= 1;
    if (!ok) {
      throw ConfigError("sample " + std::to_string(i + 1) + " has label " +
                        std::to_string(label) + ", not valid for a " +
                        std::string(to_string(task)) + " task");
    }
  }
  if (task == Task::kMulticlass && data.meta.num_classes() < 2) {
    throw ConfigError("multiclass task needs at least 2 classes");
  }
}

Dataset read_csv(std::istream& in, const CsvSchema& schema, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": missing header row");
  const auto header_views = split_commas(line);
  std::vector<std::string> header(header_views.begin(), header_views.end());
  const auto label_it = std::find(header.begin(), header.end(), schema.label_column);
  if (label_it == header.end()) {
    throw ParseError(source + ": label column '" + schema.label_column + "' not in header");
  }
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t dim = header.size() - 1;
  if (dim == 0) throw ParseError(source + ": no feature columns");
  if (schema.task == Task::kBinary && schema.positive_tokens.empty()) {
    throw ConfigError("binary CSV schema needs at least one positive label token");
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> tokens;
  std::size_t line_no = 1;
  std::vector<double> features(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw ParseError(source + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " columns, header has " +
                       std::to_string(header.size()));
    }
    std::size_t f = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) continue;
      const auto value = parse_double(cells[c]);
      if (!value) {
        throw ParseError(source + ": line " + std::to_string(line_no) + ", column " +
                         std::to_string(c + 1) + " ('" + header[c] + "'): '" +
                         std::string(cells[c]) + "' is not a number");
      }
      features[f++] = *value;
    }
    rows.push_back(features);
    tokens.emplace_back(cells[label_col]);
  }

  std::map<std::string, int> mapping = schema.class_mapping;
  if (schema.task == Task::kMulticlass && mapping.empty()) {
    std::vector<std::string> distinct(tokens.begin(), tokens.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const bool numeric = std::all_of(distinct.begin(), distinct.end(),
                                     [](const std::string& t) { return parse_integer(t).has_value(); });
    if (numeric) {
      std::sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
        return *parse_integer(a) < *parse_integer(b);
      });
    }
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      mapping[distinct[i]] = static_cast<int>(i) + 1;
    }
  }

  Dataset data;
  data.examples.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    int label = 0;
    if (schema.task == Task::kBinary) {
      label = schema.positive_tokens.count(tokens[r]) ? 1 : -1;
    } else {
      const auto it = mapping.find(tokens[r]);
      if (it == mapping.end()) {
        throw ParseError(source + ": data row " + std::to_string(r + 1) + " has unmapped label '" +
                         tokens[r] + "'");
      }
      label = it->second;
    }
    data.examples.push_back({FeatureVector::dense(rows[r]), label});
  }
  data.meta = describe(data.examples, dim, source);
  return data;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  auto in = open_input(path);
  return read_csv(in, schema, path);
}

Dataset read_sparse(std::istream& in, std::optional<std::size_t> dim, const std::string& source) {
  struct Row {
    int label;
    std::vector<std::pair<std::uint32_t, double>> entries;
  };
  std::vector<Row> rows;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    const auto where = [&] { return source + ": line " + std::to_string(line_no); };

    auto next_token = [&rest]() {
      rest = trim(rest);
      const auto end = rest.find_first_of(" \t");
      auto tok = rest.substr(0, end);
      rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
      return tok;
    };

    const auto label_tok = next_token();
    const auto label_value = parse_double(label_tok);
    if (!label_value || *label_value != std::floor(*label_value)) {
      throw ParseError(where() + ": bad label '" + std::string(label_tok) + "'");
    }
    Row row{static_cast<int>(*label_value), {}};
    long long previous = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(where() + ": expected idx:val, got '" + std::string(tok) + "'");
      }
      const auto index = parse_integer(tok.substr(0, colon));
      const auto value = parse_double(tok.substr(colon + 1));
      if (!index || !value || *index < 1) {
        throw ParseError(where() + ": unparseable token '" + std::string(tok) + "'");
      }
      if (*index <= previous) {
        throw ParseError(where() + ": indices must be strictly increasing at '" +
                         std::string(tok) + "'");
      }
      previous = *index;
      row.entries.emplace_back(static_cast<std::uint32_t>(*index - 1), *value);
      max_index = std::max(max_index, static_cast<std::size_t>(*index));
    }
    rows.push_back(std::move(row));
  }

  std::size_t d = max_index;
  if (dim) {
    if (*dim < max_index) {
      throw ConfigError(source + ": declared dimension " + std::to_string(*dim) +
                        " is smaller than the largest index " + std::to_string(max_index));
    }
    d = *dim;
  }
  if (d == 0) d = 1;

  Dataset data;
  data.examples.reserve(rows.size());
  for (auto& row : rows) {
    data.examples.push_back({FeatureVector::sparse(d, std::move(row.entries)), row.label});
  }
  data.meta = describe(data.examples, d, source);
  return data;
}

Dataset load_sparse(const std::string& path, std::optional<std::size_t> dim) {
  auto in = open_input(path);
  return read_sparse(in, dim, path);
}

void write_sparse(std::ostream& out, std::span<const LabeledExample> examples) {
  for (const auto& ex : examples) {
    out << ex.label;
    const auto idx = ex.x.indices();
    const auto val = ex.x.values();
    for (std::size_t n = 0; n < idx.size(); ++n) {
      out << ' ' << (idx[n] + 1) << ':' << format_double(val[n]);
    }
    out << '\n';
  }
}

void save_sparse(const std::string& path, std::span<const LabeledExample> examples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_sparse(out, examples);
  if (!out) throw Error("write failed for '" + path + "'");
}

CostMatrix cost_matrix_from_counts(std::span<const std::size_t> counts) {
  if (counts.size() < 2) throw ConfigError("cost matrix needs at least 2 class counts");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) {
      throw ConfigError("class " + std::to_string(i + 1) + " has zero samples; cannot derive cost");
    }
  }
  const double n_max = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const std::size_t k = counts.size();
  std::vector<double> costs(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double row_cost = n_max / static_cast<double>(counts[i]);
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) costs[i * k + j] = row_cost;
    }
  }
  return CostMatrix(k, std::move(costs));
}

CostMatrix load_cost_matrix(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      const auto v = parse_double(tok);
      if (!v) throw ParseError(path + ": bad cost '" + tok + "'");
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows * rows != values.size()) {
    throw ParseError(path + ": cost matrix must be square");
  }
  return CostMatrix(rows, std::move(values));
}

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic spec needs at least 2 classes");
  if (dim == 0) throw ConfigError("synthetic spec needs a positive dimension");
  if (samples == 0) throw ConfigError("synthetic spec needs at least one sample");
  if (priors.size() != num_classes) throw ConfigError("synthetic spec needs one prior per class");
  double total = 0.0;
  for (double p : priors) {
    if (!(p > 0.0)) throw ConfigError("synthetic priors must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synthetic priors must sum to 1");
  if (means.size() != num_classes) throw ConfigError("synthetic spec needs one mean per class");
  for (const auto& m : means) {
    if (m.size() != dim) throw ConfigError("synthetic mean has the wrong dimension");
    for (double v : m) {
      if (!std::isfinite(v)) throw ConfigError("synthetic mean must be finite");
    }
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw ConfigError("synthetic noise must be non-negative");
  }
  if (!(flip >= 0.0 && flip < 0.5)) throw ConfigError("synthetic flip must lie in [0, 0.5)");
}

std::vector<std::vector<double>> random_means(std::size_t num_classes, std::size_t dim,
                                              double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
  for (auto& m : means) {
    for (double& v : m) v = separation * normal(rng);
  }
  return means;
}

std::string synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::ordered_json j;
  j["k"] = spec.num_classes;
  j["d"] = spec.dim;
  j["priors"] = spec.priors;
  j["means"] = spec.means;
  j["noise"] = spec.noise;
  j["flip"] = spec.flip;
  j["n"] = spec.samples;
  j["seed"] = spec.seed;
  return j.dump();
}

SyntheticSpec synthetic_spec_from_json(const std::string& text) {
  SyntheticSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    spec.num_classes = j.at("k").get<std::size_t>();
    spec.dim = j.at("d").get<std::size_t>();
    spec.priors = j.at("priors").get<std::vector<double>>();
    if (j.contains("means")) {
      spec.means = j.at("means").get<std::vector<std::vector<double>>>();
    } else {
      spec.means = random_means(spec.num_classes, spec.dim, j.value("separation", 1.0),
                                j.value("seed", std::uint64_t{0}));
    }
    spec.noise = j.value("noise", 1.0);
    spec.flip = j.value("flip", 0.0);
    spec.samples = j.at("n").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<std::size_t> pick_class(spec.priors.begin(), spec.priors.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> other(0, spec.num_classes - 2);

  const bool binary = spec.num_classes == 2;
  Dataset data;
  data.examples.reserve(spec.samples);
  std::vector<double> features(spec.dim);
  for (std::size_t n = 0; n < spec.samples; ++n) {
    const std::size_t cls = pick_class(rng);
    for (std::size_t i = 0; i < spec.dim; ++i) {
      features[i] = spec.means[cls][i] + spec.noise * normal(rng);
    }
    std::size_t observed = cls;
    if (spec.flip > 0.0 && unit(rng) < spec.flip) {
      const std::size_t draw = other(rng);
      observed = draw >= cls ? draw + 1 : draw;
    }
    const int label = binary ? (observed == 1 ? 1 : -1) : static_cast<int>(observed) + 1;
    data.examples.push_back({FeatureVector::dense(features), label});
  }
  data.meta = describe(data.examples, spec.dim, "synthetic:" + synthetic_spec_to_json(spec));
  return data;
}

void MinMaxScaler::fit(std::span<const LabeledExample> examples) {
  if (examples.empty()) throw ConfigError("cannot fit a scaler on no samples");
  const std::size_t d = examples.front().x.dim();
  lo_.assign(d, 0.0);
  hi_.assign(d, 0.0);
  std::vector<double> dense;
  bool first = true;
  for (const auto& ex : examples) {
    if (ex.x.dim() != d) throw DimensionError("scaler input has mixed dimensions");
    dense = ex.x.to_dense();
    for (std::size_t i = 0; i < d; ++i) {
      lo_[i] = first ? dense[i] : std::min(lo_[i], dense[i]);
      hi_[i] = first ? dense[i] : std::max(hi_[i], dense[i]);
    }
    first = false;
  }
}

LabeledExample MinMaxScaler::transform(const LabeledExample& ex) const {
  if (!fitted()) throw ConfigError("scaler used before fit");
  if (ex.x.dim() != lo_.size()) throw DimensionError("scaler dimension mismatch");
  auto dense = ex.x.to_dense();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const double range = hi_[i] - lo_[i];
    dense[i] = range > 0.0 ? (dense[i] - lo_[i]) / range : 0.0;
  }
  return {FeatureVector::dense(dense), ex.label};
}

std::vector<LabeledExample> MinMaxScaler::transform(std::span<const LabeledExample> examples) const {
  std::vector<LabeledExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(transform(ex));
  return out;
}

}  // namespace csol
