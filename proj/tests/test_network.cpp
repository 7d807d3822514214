#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "distoco/network.hpp"

using namespace distoco;

namespace {

// Independent reachability oracle: breadth-first search over an edge list.
bool bfs_connected(const Matrix& W) {
  const Index n = W.rows();
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Index v = queue[head];
    for (Index u = 0; u < n; ++u)
      if ((W(u, v) > 0.0 || W(v, u) > 0.0) && !seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        queue.push_back(u);
      }
  }
  return static_cast<Index>(queue.size()) == n;
}

}  // namespace

TEST(ErPathMixing, CompleteGraph) {
  const auto W = generate_er_path_mixing(3, 1.0, 1, 0);
  EXPECT_TRUE(W.weights().isApprox(Matrix::Constant(3, 3, 1.0 / 3.0), 1e-15));
  EXPECT_DOUBLE_EQ(W.min_weight(), 1.0 / 3.0);
}

TEST(ErPathMixing, PathGraph) {
  const auto W = generate_er_path_mixing(3, 0.0, 5, 9);
  Matrix expected(3, 3);
  expected << 2.0 / 3, 1.0 / 3, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 1.0 / 3, 2.0 / 3;
  EXPECT_TRUE(W.weights().isApprox(expected, 1e-15));
  EXPECT_EQ(W.in_neighbors(1), (std::vector<Index>{0, 2}));
  EXPECT_EQ(W.in_neighbors(0), (std::vector<Index>{1}));
}

TEST(ErPathMixing, RejectsBadArguments) {
  EXPECT_THROW(generate_er_path_mixing(1, 0.5, 1, 0), ArgumentError);
  EXPECT_THROW(generate_er_path_mixing(4, 1.5, 1, 0), ArgumentError);
  EXPECT_THROW(generate_er_path_mixing(4, -0.1, 1, 0), ArgumentError);
}

TEST(ErPathMixing, HundredAgentsValidate) {
  GraphSequence seq;
  seq.window = 1;
  for (Index t = 1; t <= 20; ++t) {
    seq.matrices.push_back(generate_er_path_mixing(100, 0.1, t, 42));
    EXPECT_TRUE(bfs_connected(seq.matrices.back().weights()));
  }
  const auto report = validate_mixing_sequence(seq);
  EXPECT_TRUE(report.passed) << report.summary();
}

TEST(ErPathMixing, SymmetricDeterministicAndVarying) {
  for (Index n : {2, 5, 9, 11, 17}) {
    for (double rho : {0.0, 0.3, 1.0}) {
      const auto W = generate_er_path_mixing(n, rho, 3, 1);
      EXPECT_EQ(W.weights(), W.weights().transpose());
      EXPECT_EQ(W.weights(), generate_er_path_mixing(n, rho, 3, 1).weights());
      for (Index i = 0; i < n; ++i) EXPECT_GE(W(i, i), 1.0 / n);
      GraphSequence s{{W}, 1};
      EXPECT_TRUE(validate_mixing_sequence(s).passed);
    }
  }
  EXPECT_NE(generate_er_path_mixing(10, 0.3, 1, 1).weights(),
            generate_er_path_mixing(10, 0.3, 2, 1).weights());
}

TEST(Validate, CompleteGraphPasses) {
  GraphSequence seq{{MixingMatrix(Matrix::Constant(4, 4, 0.25), 0.25)}, 1};
  EXPECT_TRUE(validate_mixing_sequence(seq).passed);
}

TEST(Validate, IdentityFails) {
  GraphSequence seq{{MixingMatrix(Matrix::Identity(3, 3), 0.5)}, 1};
  const auto report = validate_mixing_sequence(seq);
  EXPECT_FALSE(report.passed);
  ASSERT_EQ(report.windows.size(), 1u);
  EXPECT_FALSE(report.windows[0].strongly_connected);
}

TEST(Validate, AlternatingSegmentsNeedWindowTwo) {
  // Round 1 links 0-1 and 2-3; round 2 links 1-2. Only the union is a path.
  Matrix A = Matrix::Zero(4, 4), B = Matrix::Zero(4, 4);
  A << 0.5, 0.5, 0, 0, 0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 0.5, 0.5;
  B << 1, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 0.5, 0.5, 0, 0, 0, 0, 1;
  EXPECT_FALSE(bfs_connected(A));
  EXPECT_TRUE(bfs_connected(A + B));
  GraphSequence seq{{MixingMatrix(A, 0.5), MixingMatrix(B, 0.5)}, 2};
  EXPECT_TRUE(validate_mixing_sequence(seq).passed);
  seq.window = 1;
  EXPECT_FALSE(validate_mixing_sequence(seq).passed);
}

TEST(Validate, DetectsStochasticityAndWeightFailures) {
  Matrix bad = Matrix::Constant(2, 2, 0.5);
  bad(0, 0) = 0.6;
  GraphSequence seq{{MixingMatrix(bad, 0.5)}, 1};
  EXPECT_FALSE(validate_mixing_sequence(seq).passed);

  Matrix small = Matrix::Constant(2, 2, 0.5);
  GraphSequence seq2{{MixingMatrix(small, 0.6)}, 1};  // 0.5 < w
  EXPECT_FALSE(validate_mixing_sequence(seq2).passed);

  Matrix zero_diag(2, 2);
  zero_diag << 0, 1, 1, 0;
  GraphSequence seq3{{MixingMatrix(zero_diag, 1.0)}, 1};
  EXPECT_FALSE(validate_mixing_sequence(seq3).passed);
}

TEST(StronglyConnected, DirectedCycle) {
  Eigen::MatrixXi cycle = Eigen::MatrixXi::Zero(3, 3);
  cycle(1, 0) = cycle(2, 1) = cycle(0, 2) = 1;
  EXPECT_TRUE(strongly_connected(cycle));
  cycle(0, 2) = 0;
  EXPECT_FALSE(strongly_connected(cycle));
}

TEST(MixStates, FixedPointsAndAverages) {
  const auto W = generate_er_path_mixing(6, 0.4, 2, 3);
  Matrix same = Matrix::Zero(6, 3);
  same.rowwise() = Eigen::RowVector3d(1, -2, 0.5);
  EXPECT_TRUE(mix_states(W, same).isApprox(same, 1e-15));

  MixingMatrix avg(Matrix::Constant(6, 6, 1.0 / 6), 1.0 / 6);
  const Matrix X = Matrix::Random(6, 3);
  const Matrix out = mix_states(avg, X);
  for (Index i = 0; i < 6; ++i)
    EXPECT_LE((out.row(i) - X.colwise().mean()).norm(), 1e-15);

  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const auto Wk = generate_er_path_mixing(8, 0.5, k + 1, 77);
    const Matrix Y = Matrix::Random(8, 4) * 10.0;
    EXPECT_LE((mix_states(Wk, Y).colwise().mean() - Y.colwise().mean()).norm(),
              1e-12);
  }
  EXPECT_THROW(mix_states(W, Matrix::Zero(5, 3)), ArgumentError);
}

TEST(MixingConstants, Formula) {
  const auto c = mixing_constants(0.5, 2, 1);
  EXPECT_DOUBLE_EQ(c.lambda, 0.96875);
  EXPECT_DOUBLE_EQ(c.tau, std::pow(0.96875, -2.0));
  EXPECT_GT(c.tau, 1.0);
  double previous = 0.0;
  for (Index B = 1; B <= 10; ++B) {
    const double lambda = mixing_constants(0.1, 5, B).lambda;
    EXPECT_GT(lambda, previous);
    EXPECT_LT(lambda, 1.0);
    previous = lambda;
  }
  EXPECT_THROW(mixing_constants(0.0, 2, 1), ArgumentError);
  EXPECT_THROW(mixing_constants(1.0, 2, 1), ArgumentError);
  EXPECT_THROW(mixing_constants(0.5, 2, 0), ArgumentError);
}

TEST(MixingConstants, ProductBoundOnFiveNodes) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GraphSequence seq;
    seq.window = 1;
    for (Index t = 1; t <= 51; ++t)
      seq.matrices.push_back(generate_er_path_mixing(5, 0.3, t, seed));
    ASSERT_TRUE(validate_mixing_sequence(seq).passed);
    const auto c = seq.constants();
    for (Index s = 0; s < 51; s += 10) {
      Matrix psi = Matrix::Identity(5, 5);
      for (Index t = s; t < 51 && t - s <= 50; ++t) {
        psi = seq.matrices[static_cast<std::size_t>(t)].weights() * psi;
        const double gap = (psi.array() - 0.2).abs().maxCoeff();
        EXPECT_LE(gap, c.tau * std::pow(c.lambda, static_cast<double>(t - s)));
      }
    }
  }
}

TEST(MixingConstants, RepeatedMixingContracts) {
  const auto W = generate_er_path_mixing(5, 0.0, 1, 0);  // fixed path graph
  GraphSequence seq{{W}, 1};
  const auto c = seq.constants();
  Matrix X = Matrix::Random(5, 2);
  auto spread = [](const Matrix& Y) {
    return (Y.rowwise() - Y.colwise().mean()).rowwise().norm().maxCoeff();
  };
  const double initial = spread(X);
  for (int k = 1; k <= 60; ++k) {
    X = mix_states(W, X);
    // Each row is within n tau lambda^k max-row-norm of the mean.
    EXPECT_LE(spread(X), 5.0 * c.tau * std::pow(c.lambda, k) * initial + 1e-12);
  }
}

TEST(GraphCsv, WritesPositiveEntries) {
  GraphSequence seq{{generate_er_path_mixing(3, 0.0, 1, 0)}, 1};
  std::ostringstream out;
  write_graph_csv(seq, out);
  const std::string s = out.str();
  EXPECT_TRUE(s.starts_with("round,i,j,weight\n"));
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 7);
}
