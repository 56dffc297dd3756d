#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "csol/binary_learners.hpp"
#include "csol/multiclass_learners.hpp"
#include "test_support.hpp"

using namespace csol;
using csol::testing::multiclass_algorithms;
using csol::testing::random_vector;

namespace {

MulticlassModel model_from_rows(const std::vector<std::vector<double>>& rows) {
  MulticlassModel m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::vector<double> row_of(const MulticlassLearner& l, std::size_t i) {
  const auto r = l.model().row(i);
  return {r.begin(), r.end()};
}

MulticlassModel random_model(std::mt19937_64& rng, std::size_t k, std::size_t d) {
  MulticlassModel m(k, d);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < k; ++i) {
    for (double& v : m.row(i)) v = normal(rng);
  }
  return m;
}

}  // namespace

TEST(McPredict, WorkedExamples) {
  const MulticlassModel zero(3, 2);
  EXPECT_EQ(mc_predict(zero, FeatureVector::dense({4, -2})).label.value(), 1);

  const auto w = model_from_rows({{1, 0}, {0, 1}, {-1, -1}});
  const auto p = mc_predict(w, FeatureVector::dense({2, 1}));
  EXPECT_EQ(p.scores, (std::vector<double>{2, 1, -3}));
  EXPECT_EQ(p.label.value(), 1);

  // Scores (1, 3, 3): tie between classes 2 and 3.
  const auto tie = model_from_rows({{1}, {3}, {3}});
  EXPECT_EQ(mc_predict(tie, FeatureVector::dense({1})).label.value(), 2);
}

TEST(McPredict, DimensionMismatch) {
  EXPECT_THROW(mc_predict(MulticlassModel(3, 2), FeatureVector::dense({1, 2, 3})),
               DimensionError);
}

TEST(MostConfused, WorkedExamples) {
  const MulticlassModel zero(3, 2);
  const auto x = FeatureVector::dense({1, 1});
  EXPECT_EQ(most_confused_class(zero, x, ClassLabel(2, 3)).value(), 1);
  EXPECT_EQ(most_confused_class(zero, x, ClassLabel(1, 3)).value(), 2);

  const std::vector<double> scores{5, 2, 9};
  EXPECT_EQ(most_confused_class(scores, ClassLabel(3, 3)).value(), 1);
  EXPECT_EQ(most_confused_class(scores, ClassLabel(1, 3)).value(), 3);
}

TEST(McHinge, WorkedExamples) {
  const auto x = FeatureVector::dense({1});
  EXPECT_EQ(mc_hinge_loss(MulticlassModel(3, 1), x, ClassLabel(2, 3)), 1.0);
  EXPECT_EQ(mc_hinge_loss(model_from_rows({{3}, {1}, {0}}), x, ClassLabel(1, 3)), 0.0);
  EXPECT_EQ(mc_hinge_loss(model_from_rows({{1}, {1}, {0}}), x, ClassLabel(1, 3)), 1.0);
}

TEST(CsLoss, WorkedExamples) {
  const auto x = FeatureVector::dense({1});
  EXPECT_EQ(cs_mc_loss(MulticlassModel(3, 1), CostMatrix::uniform(3), x, ClassLabel(1, 3)), 1.0);

  // W_y·x − W_p·x = 4 with c(y, p) = 7.
  const CostMatrix costs(3, {0, 7, 7, 1, 0, 1, 1, 1, 0});
  EXPECT_EQ(cs_mc_loss(model_from_rows({{5}, {1}, {0}}), costs, x, ClassLabel(1, 3)), 3.0);

  EXPECT_THROW(cs_mc_loss(MulticlassModel(3, 1), CostMatrix::uniform(2), x, ClassLabel(1, 3)),
               ConfigError);
}

TEST(CsLoss, UnitCostsEqualMulticlassHinge) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cls(1, 4);
  const auto unit = CostMatrix::uniform(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = random_model(rng, 4, 5);
    const auto x = random_vector(rng, 5);
    const ClassLabel y(cls(rng), 4);
    EXPECT_EQ(cs_mc_loss(m, unit, x, y), mc_hinge_loss(m, x, y));
  }
}

TEST(Arcsmc, WorkedExample) {
  for (auto mode : {CovarianceMode::kDiagonal, CovarianceMode::kFull}) {
    Hyperparams hp;
    hp.gamma = 1.0;
    hp.covariance = mode;
    MulticlassLearner l(Algorithm::kArcsmc, 3, 2, hp, CostMatrix::uniform(3));
    const auto out = l.step(FeatureVector::dense({1, 0}), ClassLabel(2, 3));
    EXPECT_EQ(out.predicted, 1);
    EXPECT_DOUBLE_EQ(out.loss, 1.0);
    EXPECT_EQ(row_of(l, 1), (std::vector<double>{0.5, 0}));
    EXPECT_EQ(row_of(l, 0), (std::vector<double>{-0.5, 0}));
    EXPECT_EQ(row_of(l, 2), (std::vector<double>{0, 0}));
    EXPECT_DOUBLE_EQ(l.covariance()->at(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(l.covariance()->at(1, 1), 1.0);
  }
}

TEST(Arcsmc, LiteralLabelScalingMultipliesStep) {
  Hyperparams hp;
  hp.literal_label_scaling = true;
  MulticlassLearner l(Algorithm::kArcsmc, 3, 2, hp, CostMatrix::uniform(3));
  l.step(FeatureVector::dense({1, 0}), ClassLabel(2, 3));
  EXPECT_EQ(row_of(l, 1), (std::vector<double>{1.0, 0}));
  EXPECT_EQ(row_of(l, 0), (std::vector<double>{-1.0, 0}));
  EXPECT_DOUBLE_EQ(l.covariance()->at(0, 0), 0.5);
}

TEST(Arcsmc, SatisfiedCostMarginIsPassive) {
  const CostMatrix costs(3, {0, 2, 2, 2, 0, 2, 2, 2, 0});
  MulticlassLearner l(Algorithm::kArcsmc, 3, 1, {}, costs);
  l.set_model(model_from_rows({{0}, {2.5}, {0}}));
  const MulticlassLearner before = l;
  const auto out = l.step(FeatureVector::dense({1}), ClassLabel(2, 3));
  EXPECT_EQ(out.loss, 0.0);
  EXPECT_FALSE(out.updated);
  EXPECT_TRUE(l.same_state(before));
}

// The second pass sees a smaller xᵀΣx, so the margin gained per unit of
// loss, α·xᵀΣx/ℓ = xᵀΣx/(xᵀΣx + γ), shrinks. α itself grows since
// β = 1/(xᵀΣx + γ).
TEST(Arcsmc, RepeatedExampleTakesSmallerStep) {
  // Costs large enough that the loss stays positive after the first step.
  const CostMatrix costs(3, {0, 10, 10, 10, 0, 10, 10, 10, 0});
  MulticlassLearner l(Algorithm::kArcsmc, 3, 2, {}, costs);
  const auto x = FeatureVector::dense({1, 0.5});
  const ClassLabel y(3, 3);
  const double v1 = l.covariance()->quadratic_form(x);
  const auto w0 = row_of(l, 2);
  const auto first = l.step(x, y);
  const double v2 = l.covariance()->quadratic_form(x);
  const auto w1 = row_of(l, 2);
  const auto second = l.step(x, y);
  const auto w2 = row_of(l, 2);
  EXPECT_LT(v2, v1);
  ASSERT_GT(second.loss, 0.0);
  const double gain1 = (dot(w1, x) - dot(w0, x)) / first.loss;
  const double gain2 = (dot(w2, x) - dot(w1, x)) / second.loss;
  EXPECT_NEAR(gain1, v1 / (v1 + 1.0), 1e-12);
  EXPECT_NEAR(gain2, v2 / (v2 + 1.0), 1e-12);
  EXPECT_LT(gain2, gain1);
}

TEST(Arcsmc, RequiresMatchingCosts) {
  EXPECT_THROW(MulticlassLearner(Algorithm::kArcsmc, 3, 2), ConfigError);
  EXPECT_THROW(MulticlassLearner(Algorithm::kArcsmc, 3, 2, {}, CostMatrix::uniform(4)),
               ConfigError);
}

TEST(Arcsmc, UnitCostsTrackArowExactly) {
  const auto data = csol::testing::gaussian_stream({0.6, 0.3, 0.1}, 6, 600, 9);
  MulticlassLearner cs(Algorithm::kArcsmc, 3, 6, {}, CostMatrix::uniform(3));
  MulticlassLearner arow(Algorithm::kArow, 3, 6);
  for (const auto& ex : data.examples) {
    const ClassLabel y(ex.label, 3);
    const double hinge = mc_hinge_loss(cs.model(), ex.x, y);
    const auto a = cs.step(ex);
    const auto b = arow.step(ex);
    ASSERT_EQ(a.loss, hinge);
    ASSERT_EQ(a.loss, b.loss);
    ASSERT_EQ(a.predicted, b.predicted);
    ASSERT_TRUE(bitwise_equal(cs.model().raw(), arow.model().raw()));
    ASSERT_TRUE(bitwise_equal(cs.covariance()->raw(), arow.covariance()->raw()));
  }
}

TEST(Baselines, PerceptronWorkedExample) {
  MulticlassLearner l(Algorithm::kPerceptron, 3, 2);
  const auto out = l.step(FeatureVector::dense({1, 0}), ClassLabel(2, 3));
  EXPECT_EQ(out.predicted, 1);
  EXPECT_EQ(row_of(l, 1), (std::vector<double>{1, 0}));
  EXPECT_EQ(row_of(l, 0), (std::vector<double>{-1, 0}));
  EXPECT_EQ(row_of(l, 2), (std::vector<double>{0, 0}));
}

TEST(Baselines, PaIMovesRowsByHalfTheBinaryStep) {
  MulticlassLearner l(Algorithm::kPaI, 3, 2);
  l.step(FeatureVector::dense({2, 0}), ClassLabel(3, 3));
  // ℓ = 1, ‖x‖² = 4, τ = 1/(2·4).
  EXPECT_EQ(row_of(l, 2), (std::vector<double>{0.25, 0}));
  EXPECT_EQ(row_of(l, 0), (std::vector<double>{-0.25, 0}));
  // The gap to the rival that triggered the update is now exactly 1; class 2
  // becomes the new rival.
  const auto x = FeatureVector::dense({2, 0});
  EXPECT_EQ(dot(l.model().row(2), x) - dot(l.model().row(0), x), 1.0);
  EXPECT_EQ(mc_hinge_loss(l.model(), x, ClassLabel(3, 3)), 0.5);
}

// With two classes and rows starting at zero, W₂ = −W₁ throughout and the
// multiclass step on the score difference is the binary PA-I step with the
// cap doubled.
TEST(Baselines, TwoClassPaIMatchesBinary) {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.35);
  Hyperparams mc_hp;
  mc_hp.C = 0.05;
  Hyperparams bin_hp;
  bin_hp.C = 0.1;
  MulticlassLearner mc(Algorithm::kPaI, 2, 4, mc_hp);
  BinaryLearner bin(Algorithm::kPaI, 4, bin_hp);
  for (int t = 0; t < 1000; ++t) {
    auto v = random_vector(rng, 4).to_dense();
    const bool positive = coin(rng);
    v[0] += positive ? 0.7 : -0.7;
    const auto x = FeatureVector::dense(v);
    const auto a = mc.step(x, ClassLabel(positive ? 2 : 1, 2));
    const auto b = bin.step(x, BinaryLabel(positive ? 1 : -1));
    ASSERT_EQ(a.predicted == 2, b.predicted == 1) << "round " << t;
    ASSERT_EQ(a.loss, b.loss) << "round " << t;
  }
}

TEST(Baselines, RommaReachesUnitGapOnFirstMistake) {
  MulticlassLearner l(Algorithm::kRomma, 3, 2);
  const auto x = FeatureVector::dense({1, 1});
  l.step(x, ClassLabel(3, 3));
  EXPECT_NEAR(dot(l.model().row(2), x) - dot(l.model().row(0), x), 1.0, 1e-15);
}

// Property: every update adds a vector to one row and subtracts it from
// another (ROMMA also rescales all rows), so rows starting at zero keep a
// zero sum.
TEST(Properties, RowSumConserved) {
  const auto data = csol::testing::gaussian_stream({0.5, 0.2, 0.2, 0.1}, 5, 400, 23);
  const CostMatrix costs(4, {0, 1, 2, 3, 1, 0, 2, 3, 1, 2, 0, 3, 1, 2, 3, 0});
  for (const auto algo : multiclass_algorithms()) {
    SCOPED_TRACE(std::string(to_string(algo)));
    MulticlassLearner l(algo, 4, 5, {}, costs);
    for (const auto& ex : data.examples) {
      l.step(ex);
      double scale = 0.0;
      for (double v : l.model().raw()) scale = std::max(scale, std::abs(v));
      for (std::size_t j = 0; j < 5; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 4; ++i) sum += l.model().row(i)[j];
        ASSERT_LE(std::abs(sum), 1e-12 * std::max(1.0, scale));
      }
    }
  }
}

TEST(Properties, PassivityAllFamilies) {
  const auto data = csol::testing::gaussian_stream({0.5, 0.3, 0.2}, 4, 1500, 29, 2.0);
  const CostMatrix costs(3, {0, 1, 3, 1, 0, 3, 1, 1, 0});
  for (const auto algo : multiclass_algorithms()) {
    SCOPED_TRACE(std::string(to_string(algo)));
    MulticlassLearner l(algo, 3, 4, {}, costs);
    int passive = 0;
    for (const auto& ex : data.examples) {
      const MulticlassLearner before = l;
      const auto out = l.step(ex);
      if (out.loss == 0.0 || !out.updated) {
        ++passive;
        ASSERT_TRUE(l.same_state(before));
      } else {
        ASSERT_FALSE(l.same_state(before));
      }
    }
    EXPECT_GT(passive, 0);
  }
}

TEST(Properties, SharedCovarianceSymmetricPsdAndShrinks) {
  for (std::size_t d : {3u, 9u, 16u}) {
    std::mt19937_64 rng(40 + d);
    std::uniform_int_distribution<int> cls(1, 3);
    Hyperparams hp;
    hp.covariance = CovarianceMode::kFull;
    hp.gamma = 0.3;
    MulticlassLearner l(Algorithm::kArcsmc, 3, d, hp,
                        CostMatrix(3, {0, 1, 4, 1, 0, 4, 1, 1, 0}));
    for (int t = 0; t < 200; ++t) {
      const auto x = random_vector(rng, d);
      const double v0 = l.covariance()->quadratic_form(x);
      l.step(x, ClassLabel(cls(rng), 3));
      ASSERT_LE(l.covariance()->quadratic_form(x), v0 * (1.0 + 1e-12));
      Eigen::MatrixXd s(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) s(i, j) = l.covariance()->at(i, j);
      }
      ASSERT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
      ASSERT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(Properties, ArgmaxInvariantUnderPositiveScaling) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = random_model(rng, 5, 6);
    const auto v = random_vector(rng, 6).to_dense();
    auto scaled = v;
    const double a = scale(rng);
    for (double& e : scaled) e *= a;
    const auto p = mc_predict(m, FeatureVector::dense(v));
    const auto q = mc_predict(m, FeatureVector::dense(scaled));
    auto sorted = p.scores;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] < 1e-9 * std::abs(sorted[0])) continue;  // near tie
    EXPECT_EQ(p.label, q.label);
  }
}

TEST(Errors, MulticlassConfiguration) {
  EXPECT_THROW(MulticlassLearner(Algorithm::kAlma, 3, 2), ConfigError);
  EXPECT_THROW(MulticlassLearner(Algorithm::kPerceptron, 1, 2), ConfigError);
  MulticlassLearner l(Algorithm::kPerceptron, 3, 2);
  EXPECT_THROW(l.step(FeatureVector::dense({1, 0}), ClassLabel(2, 4)), ConfigError);
  EXPECT_THROW(l.step(FeatureVector::dense({1}), ClassLabel(2, 3)), DimensionError);
  EXPECT_THROW(l.set_model(MulticlassModel(2, 2)), DimensionError);
}

TEST(Errors, ZeroVectorIsDegenerate) {
  MulticlassLearner l(Algorithm::kPaI, 3, 2);
  const auto out = l.step(FeatureVector::sparse(2, {}), ClassLabel(2, 3));
  EXPECT_FALSE(out.updated);
  EXPECT_EQ(l.degenerate_events(), 1u);
}
