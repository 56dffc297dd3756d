// Acceptance suite: one PASS / FAIL / SKIP line per criterion, nonzero exit
// on any failure.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "csol/binary_learners.hpp"
#include "csol/evaluation.hpp"
#include "csol/experiment.hpp"
#include "csol/multiclass_learners.hpp"
#include "reference_loop.hpp"

using namespace csol;

namespace {

struct Outcome {
  enum Status { kPass, kFail, kSkip } status;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

FeatureVector random_vector(std::mt19937_64& rng, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(d);
  for (double& e : v) e = normal(rng);
  return FeatureVector::dense(v);
}

Dataset gaussian(std::vector<double> priors, std::size_t d, std::size_t n, std::uint64_t seed,
                 double separation, double noise) {
  SyntheticSpec spec;
  spec.num_classes = priors.size();
  spec.dim = d;
  spec.priors = std::move(priors);
  spec.means = random_means(spec.num_classes, d, separation, seed + 1000);
  spec.noise = noise;
  spec.samples = n;
  spec.seed = seed;
  return generate_synthetic(spec);
}

const std::vector<Algorithm> kBinary{Algorithm::kPerceptron, Algorithm::kAlma, Algorithm::kRomma,
                                     Algorithm::kOgd,        Algorithm::kPa,   Algorithm::kPaI,
                                     Algorithm::kCw,         Algorithm::kArow, Algorithm::kScw,
                                     Algorithm::kCsogd,      Algorithm::kArcsogd};
const std::vector<Algorithm> kMulticlass{Algorithm::kPerceptron, Algorithm::kRomma,
                                         Algorithm::kOgd,        Algorithm::kPaI,
                                         Algorithm::kArow,       Algorithm::kScw,
                                         Algorithm::kArcsmc};

Outcome closed_form() {
  Hyperparams hp;
  hp.gamma = 1.0;
  BinaryLearner arow(Algorithm::kArow, 2, hp);
  arow.step(FeatureVector::dense({1, 0}), BinaryLabel(1));
  double err = std::abs(arow.weights()[0] - 0.5) + std::abs(arow.weights()[1]) +
               std::abs(arow.covariance()->at(0, 0) - 0.5) +
               std::abs(arow.covariance()->at(1, 1) - 1.0);
  MulticlassLearner mc(Algorithm::kArcsmc, 3, 2, hp, CostMatrix::uniform(3));
  mc.step(FeatureVector::dense({1, 0}), ClassLabel(2, 3));
  const auto& w = mc.model();
  err += std::abs(w.row(1)[0] - 0.5) + std::abs(w.row(1)[1]) + std::abs(w.row(0)[0] + 0.5) +
         std::abs(w.row(0)[1]) + std::abs(w.row(2)[0]) + std::abs(w.row(2)[1]) +
         std::abs(mc.covariance()->at(0, 0) - 0.5);
  const auto d = fmt("total abs deviation %.3g", err);
  return err <= 1e-10 ? pass(d) : fail(d);
}

// Runs each learner over a well-separated stream, stepping a copy of the
// state each round, until 10,000 zero-loss steps have been observed.
Outcome passivity() {
  constexpr int kTarget = 10000;
  const auto binary = gaussian({0.6, 0.4}, 8, 60000, 1, 3.0, 0.5);
  const auto multi = gaussian({0.5, 0.3, 0.2}, 8, 60000, 2, 3.0, 0.5);
  const CostMatrix costs(3, {0, 1, 1, 2, 0, 2, 4, 4, 0});
  std::string worst;
  int min_seen = kTarget * 10;
  int violations = 0;

  const auto check = [&](const std::string& name, auto& learner, const Dataset& data) {
    int seen = 0;
    for (const auto& ex : data.examples) {
      const auto before = learner;
      const auto out = learner.step(ex);
      if (out.loss != 0.0) continue;
      ++seen;
      if (!learner.same_state(before)) ++violations;
      if (seen == kTarget) break;
    }
    if (seen < min_seen) {
      min_seen = seen;
      worst = name;
    }
  };
  for (const auto algo : kBinary) {
    BinaryLearner l(algo, 8);
    check(std::string(to_string(algo)), l, binary);
  }
  for (const auto algo : kMulticlass) {
    MulticlassLearner l(algo, 3, 8, {}, costs);
    check("mc-" + std::string(to_string(algo)), l, multi);
  }
  const std::string d = std::to_string(kBinary.size() + kMulticlass.size()) +
                        " learners, fewest zero-loss steps " + std::to_string(min_seen) + " (" +
                        worst + "), violations " + std::to_string(violations);
  return (violations == 0 && min_seen >= kTarget) ? pass(d) : fail(d);
}

Outcome pa_margin() {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin;
  BinaryLearner pa(Algorithm::kPa, 10);
  int triggered = 0;
  double worst_hinge = 0.0;
  while (triggered < 10000) {
    const auto x = random_vector(rng, 10, 0.1 + (triggered % 9));
    const BinaryLabel y(coin(rng) ? 1 : -1);
    if (!pa.step(x, y).updated) continue;
    ++triggered;
    worst_hinge = std::max(worst_hinge, hinge_loss(pa.weights(), x, y));
  }
  double worst_ratio = 0.0;
  for (double C : {0.001, 0.1, 1.0, 10.0}) {
    Hyperparams hp;
    hp.C = C;
    BinaryLearner pa1(Algorithm::kPaI, 10, hp);
    for (int t = 0; t < 10000; ++t) {
      const auto x = random_vector(rng, 10, 0.1 + (t % 9));
      const BinaryLabel y(coin(rng) ? 1 : -1);
      std::vector<double> before(pa1.weights().begin(), pa1.weights().end());
      pa1.step(x, y);
      double moved = 0.0;
      for (std::size_t i = 0; i < 10; ++i) {
        moved += (pa1.weights()[i] - before[i]) * (pa1.weights()[i] - before[i]);
      }
      worst_ratio = std::max(worst_ratio, std::sqrt(moved) / (C * std::sqrt(x.squared_norm())));
    }
  }
  const std::string d = fmt("max post-update hinge %.3g", worst_hinge) +
                        fmt(", max PA-I step / (C|x|) %.15g", worst_ratio);
  return (worst_hinge <= 1e-10 && worst_ratio <= 1.0 + 1e-12) ? pass(d) : fail(d);
}

Outcome covariance_properties() {
  double asym = 0.0;
  double min_eig = INFINITY;
  double growth = 0.0;
  int steps = 0;
  for (std::size_t d : {4u, 16u}) {
    std::mt19937_64 rng(40 + d);
    std::bernoulli_distribution coin(0.3);
    std::uniform_int_distribution<int> cls(1, 3);
    Hyperparams hp;
    hp.covariance = CovarianceMode::kFull;
    BinaryLearner arow(Algorithm::kArow, d, hp);
    MulticlassLearner arcsmc(Algorithm::kArcsmc, 3, d, hp,
                             CostMatrix(3, {0, 1, 1, 3, 0, 3, 12, 12, 0}));
    const auto inspect = [&](const Covariance& cov, const FeatureVector& x, double v0) {
      ++steps;
      growth = std::max(growth, cov.quadratic_form(x) - v0);
      Eigen::MatrixXd s(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) s(i, j) = cov.at(i, j);
      }
      asym = std::max(asym, (s - s.transpose()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    };
    for (int t = 0; t < 250; ++t) {
      const auto x = random_vector(rng, d);
      double v0 = arow.covariance()->quadratic_form(x);
      arow.step(x, BinaryLabel(coin(rng) ? 1 : -1));
      inspect(*arow.covariance(), x, v0);
      v0 = arcsmc.covariance()->quadratic_form(x);
      arcsmc.step(x, ClassLabel(cls(rng), 3));
      inspect(*arcsmc.covariance(), x, v0);
    }
  }
  const std::string d = std::to_string(steps) + " steps, max asymmetry " + fmt("%.3g", asym) +
                        fmt(", min eigenvalue %.3g", min_eig) +
                        fmt(", max x'Sx increase %.3g", growth);
  return (steps >= 1000 && asym <= 1e-10 && min_eig >= -1e-10 && growth <= 0.0) ? pass(d)
                                                                                : fail(d);
}

Outcome degeneracies() {
  const auto binary = gaussian({0.8, 0.2}, 10, 1000, 5, 1.0, 1.0);
  Hyperparams hp;
  hp.rho = 1.0;
  BinaryLearner cs(Algorithm::kCsogd, 10, hp);
  BinaryLearner ogd(Algorithm::kOgd, 10, hp);
  std::size_t first_diff = 0;
  for (std::size_t t = 0; t < binary.examples.size() && first_diff == 0; ++t) {
    const auto a = cs.step(binary.examples[t]);
    const auto b = ogd.step(binary.examples[t]);
    if (a.loss != b.loss || a.predicted != b.predicted ||
        !bitwise_equal(cs.weights(), ogd.weights())) {
      first_diff = t + 1;
    }
  }
  const auto multi = gaussian({0.6, 0.3, 0.1}, 10, 1000, 6, 1.0, 1.0);
  MulticlassLearner unit(Algorithm::kArcsmc, 3, 10, {}, CostMatrix::uniform(3));
  MulticlassLearner hinge(Algorithm::kArow, 3, 10);
  std::size_t mc_diff = 0;
  for (std::size_t t = 0; t < multi.examples.size() && mc_diff == 0; ++t) {
    const auto& ex = multi.examples[t];
    const double expected = mc_hinge_loss(unit.model(), ex.x, ClassLabel(ex.label, 3));
    const auto a = unit.step(ex);
    const auto b = hinge.step(ex);
    if (a.loss != expected || a.loss != b.loss ||
        !bitwise_equal(unit.model().raw(), hinge.model().raw()) ||
        !bitwise_equal(unit.covariance()->raw(), hinge.covariance()->raw())) {
      mc_diff = t + 1;
    }
  }
  const std::string d = "csogd/ogd first divergence " + std::to_string(first_diff) +
                        ", arcsmc/hinge first divergence " + std::to_string(mc_diff) +
                        " (0 = none over 1000 steps)";
  return (first_diff == 0 && mc_diff == 0) ? pass(d) : fail(d);
}

Outcome mistake_bound() {
  const std::size_t d = 6;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> u(d);
  double un = 0.0;
  for (double& v : u) {
    v = normal(rng);
    un += v * v;
  }
  for (double& v : u) v /= std::sqrt(un);
  BinaryLearner p(Algorithm::kPerceptron, d);
  int mistakes = 0;
  int accepted = 0;
  while (accepted < 10000) {
    std::vector<double> x(d);
    double xn = 0.0;
    for (double& v : x) {
      v = normal(rng);
      xn += v * v;
    }
    double ux = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] /= std::sqrt(xn);
      ux += u[i] * x[i];
    }
    if (std::abs(ux) < 0.2) continue;
    ++accepted;
    if (p.step(FeatureVector::dense(x), BinaryLabel(ux > 0 ? 1 : -1)).updated) ++mistakes;
  }
  const std::string det = std::to_string(mistakes) + " mistakes on 10000 samples (bound 25)";
  return mistakes <= 25 ? pass(det) : fail(det);
}

Outcome oracle_equivalence() {
  const std::string path = std::string(CSOL_FIXTURES) + "/stream100.svm";
  const auto data = load_sparse(path);
  const auto rows = reference::read_sparse_dense(path, data.meta.dim);
  int mismatches = 0;
  int snapshots = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto order = shuffled_order(rows.size(), seed);
    const auto expected = reference::prequential(rows, order, reference::Update::kPerceptron, 1.0, 10);
    BinaryLearner p(Algorithm::kPerceptron, data.meta.dim);
    RunOptions opts;
    opts.curve_stride = 10;
    const auto run = prequential_run(p, data.examples, opts, order);
    if (run.curve.size() != expected.size()) return fail("snapshot count differs");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      ++snapshots;
      const auto& e = expected[i];
      const auto& s = run.curve[i];
      bool same = s.round == e.round && s.error_rate == e.error_rate &&
                  s.sensitivity.has_value() == e.sens_defined &&
                  s.specificity.has_value() == e.spec_defined;
      if (same && e.sens_defined) same = *s.sensitivity == e.sens;
      if (same && e.spec_defined) same = *s.specificity == e.spec;
      if (same && e.sens_defined && e.spec_defined) same = *s.weighted_sum == e.sum;
      if (!same) ++mismatches;
    }
    const auto& last = expected.back();
    const auto& c = run.binary_counts;
    if (c.tp != last.tp || c.tn != last.tn || c.fp != last.fp || c.fn != last.fn) ++mismatches;
  }
  const std::string d = std::to_string(snapshots) + " snapshots over 10 shuffles, " +
                        std::to_string(mismatches) + " mismatches";
  return mismatches == 0 ? pass(d) : fail(d);
}

int paired_wins(const TrialReport& challenger, const TrialReport& baseline,
                const std::function<std::optional<double>(const MetricSnapshot&)>& metric) {
  int wins = 0;
  for (std::size_t i = 0; i < challenger.finals.size(); ++i) {
    const auto a = metric(challenger.finals[i]);
    const auto b = metric(baseline.finals[i]);
    if (a && b && *a > *b) ++wins;
  }
  return wins;
}

Outcome multiclass_advantage() {
  const auto data = gaussian({0.71, 0.23, 0.06}, 10, 5000, 3, 1.0, 1.0);
  TrialConfig cfg;
  cfg.task = Task::kMulticlass;
  cfg.master_seed = 2024;
  cfg.algorithm = Algorithm::kArcsmc;
  const auto cs = trial_suite(cfg, data);
  cfg.algorithm = Algorithm::kArow;
  const auto base = trial_suite(cfg, data);
  const int wins = paired_wins(cs, base, [](const MetricSnapshot& s) {
    return s.per_class[2].weighted_sum;
  });
  const std::string d = "arcsmc wins " + std::to_string(wins) +
                        "/10 on minority-class sum" +
                        fmt(" (mean %.4f", *cs.per_class[2].weighted_sum.mean) +
                        fmt(" vs %.4f)", *base.per_class[2].weighted_sum.mean);
  return wins >= 8 ? pass(d) : fail(d);
}

Outcome binary_advantage() {
  const auto data = gaussian({0.8, 0.2}, 6, 5000, 4, 1.0, 1.0);
  TrialConfig cfg;
  cfg.master_seed = 99;
  cfg.algorithm = Algorithm::kCsogd;
  const auto cs = trial_suite(cfg, data);
  cfg.algorithm = Algorithm::kOgd;
  const auto base = trial_suite(cfg, data);
  const int wins =
      paired_wins(cs, base, [](const MetricSnapshot& s) { return s.weighted_sum; });
  const std::string d = "csogd wins " + std::to_string(wins) + "/10 on weighted sum" +
                        fmt(" (mean %.4f", *cs.weighted_sum.mean) +
                        fmt(" vs %.4f)", *base.weighted_sum.mean);
  return wins >= 8 ? pass(d) : fail(d);
}

std::vector<LabeledExample> dense_stream(std::size_t n, std::size_t d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> cls(1, k);
  std::vector<LabeledExample> out;
  out.reserve(n);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = cls(rng);
    for (std::size_t j = 0; j < d; ++j) v[j] = normal(rng) + (j % k == static_cast<std::size_t>(c - 1) ? 1.0 : 0.0);
    const int label = k == 2 ? (c == 2 ? 1 : -1) : c;
    out.push_back({FeatureVector::dense(v), label});
  }
  return out;
}

Outcome throughput() {
  const auto gas = dense_stream(274628, 17, 2, 10);
  const auto power = dense_stream(78377, 128, 3, 11);
  using clock = std::chrono::steady_clock;

  double first_order = 0.0;
  for (const auto algo : {Algorithm::kPerceptron, Algorithm::kPaI, Algorithm::kOgd}) {
    BinaryLearner l(algo, 17);
    const auto start = clock::now();
    prequential_run(l, gas);
    first_order = std::max(first_order, std::chrono::duration<double>(clock::now() - start).count());
  }
  MulticlassLearner arcsmc(Algorithm::kArcsmc, 3, 128, {}, CostMatrix(3, {0, 1, 1, 3, 0, 3, 12, 12, 0}));
  const auto start = clock::now();
  prequential_run(arcsmc, power);
  const double second = std::chrono::duration<double>(clock::now() - start).count();
  const std::string d = fmt("slowest first-order pass %.3f s (limit 5)", first_order) +
                        fmt(", arcsmc diagonal pass %.3f s (limit 10)", second);
  return (first_order <= 5.0 && second <= 10.0) ? pass(d) : fail(d);
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "csol_acceptance_determinism";
  std::filesystem::remove_all(root);
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.dim = 8;
  spec.priors = {0.71, 0.23, 0.06};
  spec.means = random_means(3, 8, 1.0, 12);
  spec.samples = 2000;
  spec.seed = 12;
  ExperimentConfig cfg;
  cfg.data.synthetic = spec;
  cfg.algorithms = {Algorithm::kArcsmc};
  cfg.trial.master_seed = 31337;
  cfg.trial.threads = 4;
  std::vector<std::string> bodies;
  for (const char* sub : {"a", "b"}) {
    cfg.out_dir = (root / sub).string();
    const auto paths = cmd_run(cfg);
    std::ifstream in(paths.summary_path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    bodies.push_back(ss.str());
  }
  std::filesystem::remove_all(root);
  const std::string d = std::to_string(bodies[0].size()) + " byte summaries";
  return (!bodies[0].empty() && bodies[0] == bodies[1]) ? pass(d + " identical")
                                                         : fail(d + " differ");
}

// Set CSOL_TESTBED_CSV to a binary testbed export (label column from
// CSOL_TESTBED_LABEL, default "marker"; positive tokens from
// CSOL_TESTBED_POSITIVE, default "Attack").
Outcome testbed_reproduction() {
  const char* path = std::getenv("CSOL_TESTBED_CSV");
  if (path == nullptr || *path == '\0') return skip("CSOL_TESTBED_CSV not set");
  if (!std::filesystem::exists(path)) return skip(std::string(path) + " not found");
  CsvSchema schema;
  const char* label = std::getenv("CSOL_TESTBED_LABEL");
  const char* positive = std::getenv("CSOL_TESTBED_POSITIVE");
  schema.label_column = label ? label : "marker";
  schema.positive_tokens = {positive ? positive : "Attack"};
  const auto data = load_csv(path, schema);
  std::string d;
  bool ok = true;
  for (const auto algo : kBinary) {
    if (is_cost_sensitive(algo)) continue;
    TrialConfig cfg;
    cfg.algorithm = algo;
    const double err = *trial_suite(cfg, data).error_rate.mean;
    d += std::string(to_string(algo)) + fmt("=%.3f ", err);
    ok = ok && err >= 0.2 && err <= 0.4;
  }
  return ok ? pass(d) : fail(d);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form AROW and ARCSMC updates", closed_form},
      {"passivity on zero-loss steps", passivity},
      {"PA hard margin and PA-I step bound", pa_margin},
      {"covariance symmetry, PSD and shrinkage", covariance_properties},
      {"CSOGD/OGD and unit-cost ARCSMC equivalences", degeneracies},
      {"perceptron mistake bound", mistake_bound},
      {"prequential reference-loop equivalence", oracle_equivalence},
      {"ARCSMC minority-class advantage", multiclass_advantage},
      {"CSOGD weighted-sum advantage", binary_advantage},
      {"throughput", throughput},
      {"byte-identical summaries", determinism},
      {"testbed error rates", testbed_reproduction},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* status = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.status == Outcome::kFail) ++failures;
    std::printf("criterion %2zu %s: %s [%s]\n", i + 1, status, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
