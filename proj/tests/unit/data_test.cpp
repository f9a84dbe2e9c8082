#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cidal/data.hpp"

using namespace cidal;

TEST(TwoMoons, FullTurnIsBitIdentical) {
  const Domain a = gen_two_moons(200, 0.1, 0.0, 7);
  const Domain b = gen_two_moons(200, 0.1, 360.0, 7);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(*a.labels, *b.labels);
}

TEST(TwoMoons, NoiselessPointsLieOnTheArcs) {
  const Domain d = gen_two_moons(101, 0.0, 0.0, 1);
  for (int i = 0; i < d.size(); ++i) {
    const double x = d.inputs(i, 0), y = d.inputs(i, 1);
    if ((*d.labels)[static_cast<std::size_t>(i)] == 0) {
      EXPECT_NEAR(std::hypot(x, y), 1.0, 1e-12);
      EXPECT_GE(y, -1e-12);
    } else {
      EXPECT_NEAR(std::hypot(x - 1.0, y - 0.5), 1.0, 1e-12);
      EXPECT_LE(y, 0.5 + 1e-12);
    }
  }
}

TEST(TwoMoons, QuarterTurnMatchesRotationMatrix) {
  const Domain a = gen_two_moons(60, 0.05, 0.0, 3);
  const Domain b = gen_two_moons(60, 0.05, 90.0, 3);
  EXPECT_EQ(*a.labels, *b.labels);
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b.inputs(i, 0), -a.inputs(i, 1), 1e-12);
    EXPECT_NEAR(b.inputs(i, 1), a.inputs(i, 0), 1e-12);
  }
}

TEST(TwoMoons, BalancedLabels) {
  EXPECT_EQ(class_counts(*gen_two_moons(500, 0.1, 0.0, 2).labels, 2), (std::vector<int>{250, 250}));
  EXPECT_EQ(class_counts(*gen_two_moons(7, 0.1, 0.0, 2).labels, 2), (std::vector<int>{3, 4}));
}

TEST(Blobs, SampleMomentsMatch) {
  Matrix means(2, 2);
  means << 0, 0, 4, -1;
  Vector shift(2);
  shift << 0.5, 2.0;
  const int n = 20000;
  const Domain d = gen_gaussian_blobs(2, n, means, 0.3, shift, 5);
  for (int j = 0; j < 2; ++j) {
    Vector sum = Vector::Zero(2);
    double sq = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i)
      if ((*d.labels)[static_cast<std::size_t>(i)] == j) {
        sum += d.inputs.row(i).transpose();
        ++count;
      }
    const Vector mean = sum / count;
    for (int i = 0; i < n; ++i)
      if ((*d.labels)[static_cast<std::size_t>(i)] == j) sq += (d.inputs.row(i).transpose() - mean).squaredNorm();
    EXPECT_EQ(count, n / 2);
    const Vector expected = means.row(j).transpose() + shift;
    EXPECT_LT((mean - expected).cwiseAbs().maxCoeff(), 5 * std::sqrt(0.3 / count));
    EXPECT_NEAR(sq / (2.0 * count), 0.3, 0.02);
  }
}

TEST(Blobs, ZeroCovarianceIsExact) {
  Matrix means(3, 1);
  means << 1, 2, 3;
  Vector shift(1);
  shift << 10;
  const Domain d = gen_gaussian_blobs(3, 10, means, 0.0, shift, 1);
  EXPECT_EQ(class_counts(*d.labels, 3), (std::vector<int>{4, 3, 3}));
  for (int i = 0; i < d.size(); ++i) EXPECT_EQ(d.inputs(i, 0), 11.0 + (*d.labels)[static_cast<std::size_t>(i)]);
}

TEST(Blobs, ShiftIsThePointwiseDifference) {
  Matrix means(2, 2);
  means << 0, 0, 3, 3;
  Vector s0 = Vector::Zero(2), s1(2);
  s1 << -2.0, 0.5;
  const Domain a = gen_gaussian_blobs(2, 50, means, 0.5, s0, 9);
  const Domain b = gen_gaussian_blobs(2, 50, means, 0.5, s1, 9);
  for (int i = 0; i < a.size(); ++i)
    EXPECT_LT((b.inputs.row(i) - a.inputs.row(i) - s1.transpose()).norm(), 1e-12);
}

TEST(Imbalance, KeepsGrowingShares) {
  Matrix means(4, 1);
  means << 0, 1, 2, 3;
  const Domain d = gen_gaussian_blobs(4, 400, means, 0.1, Vector::Zero(1), 3);
  const Domain imb = apply_imbalance(d, 4);
  EXPECT_EQ(class_counts(*imb.labels, 4), (std::vector<int>{25, 50, 75, 100}));
  const Domain moons = apply_imbalance(gen_two_moons(101, 0.1, 0.0, 1), 2);
  EXPECT_EQ(class_counts(*moons.labels, 2), (std::vector<int>{25, 51}));
}

TEST(TaskStream, TargetsCarryNoLabelChannel) {
  StreamConfig c;
  c.n_train = 40;
  c.n_test = 30;
  const TaskStream s = make_task_stream(c, 1);
  EXPECT_EQ(s.domain_count(), 3);
  EXPECT_EQ(s.k, 2);
  EXPECT_EQ(s.d, 2);
  ASSERT_EQ(s.targets.size(), 2u);
  for (const auto& t : s.targets) {
    EXPECT_EQ(t.train.size(), 40);
    EXPECT_EQ(t.test.size(), 30);
    EXPECT_EQ(t.test.labels.size(), 30u);
  }
  EXPECT_EQ(s.source_train.labels.size(), 40u);
  EXPECT_EQ(&s.test_set(0), &s.source_test);
  EXPECT_EQ(&s.test_set(2), &s.targets[1].test);
  EXPECT_THROW(s.test_set(3), ValidationError);
}

TEST(TaskStream, SourceIsStandardized) {
  const TaskStream s = make_task_stream(default_blob_stream(), 4);
  const Matrix& x = s.source_train.inputs;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::RowVectorXd var = (x.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(x.rows());
  EXPECT_NEAR(var(0), 1.0, 1e-12);
  EXPECT_NEAR(var(1), 1.0, 1e-12);
}

TEST(TaskStream, SingleDomainAndDeclaredOrder) {
  StreamConfig c;
  c.rotations_deg = {0.0};
  c.n_train = c.n_test = 20;
  EXPECT_TRUE(make_task_stream(c, 1).targets.empty());

  c.rotations_deg = {0.0, 60.0, 30.0};
  const TaskStream s = make_task_stream(c, 1);
  EXPECT_EQ(s.targets[0].train.name, "moons_60deg");
  EXPECT_EQ(s.targets[1].train.name, "moons_30deg");
}

TEST(TaskStream, InconsistentWidthRejected) {
  StreamConfig c = default_blob_stream();
  c.blob_shifts = Matrix::Zero(2, 3);
  EXPECT_THROW(make_task_stream(c, 1), ValidationError);
  StreamConfig empty;
  empty.rotations_deg.clear();
  EXPECT_THROW(make_task_stream(empty, 1), ValidationError);
}
