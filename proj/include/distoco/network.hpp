#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "distoco/core.hpp"

namespace distoco {

/// Per-round weight matrix W_t. Entry (i, j) > 0 means agent i receives
/// agent j's decision in that round. Construction only checks shape and
/// sign; the doubly stochastic and connectivity requirements are checked by
/// validate_mixing_sequence.
class MixingMatrix {
 public:
  MixingMatrix(Matrix weights, double min_weight);

  Index size() const { return W_.rows(); }
  const Matrix& weights() const { return W_; }
  double operator()(Index i, Index j) const { return W_(i, j); }
  /// Lower bound w on every positive entry.
  double min_weight() const { return w_; }

  /// In-neighbors of agent i (j != i with W(i, j) > 0).
  std::vector<Index> in_neighbors(Index i) const;

 private:
  Matrix W_;
  double w_;
};

struct MixingConstants {
  double tau = 0.0;
  double lambda = 0.0;
};

/// tau = (1 - w/4n^2)^-2, lambda = (1 - w/4n^2)^(1/B). Every entry of the
/// product W_t ... W_s stays within tau * lambda^(t-s) of 1/n.
MixingConstants mixing_constants(double w, Index n, Index window);

struct GraphSequence {
  std::vector<MixingMatrix> matrices;
  Index window = 1;  ///< B: every B consecutive rounds form a strongly connected union

  MixingConstants constants() const;
};

/// Undirected Erdos-Renyi graph with edge probability rho, plus the path
/// edges (i, i+1). Weights are 1/n on edges and the remainder on the
/// diagonal, so w = 1/n. Deterministic in (seed, round).
MixingMatrix generate_er_path_mixing(Index n, double rho, Index round,
                                     std::uint64_t seed);

struct MatrixCheck {
  Index round = 0;
  double row_residual = 0.0;   ///< max_i |sum_j W_ij - 1|
  double col_residual = 0.0;   ///< max_j |sum_i W_ij - 1|
  double min_positive = 0.0;   ///< smallest positive entry
  bool nonnegative = true;
  bool diagonal_positive = true;
  bool passed = true;
};

struct WindowCheck {
  Index first_round = 0;
  Index last_round = 0;
  bool strongly_connected = false;
};

struct ValidationReport {
  std::vector<MatrixCheck> matrices;
  std::vector<WindowCheck> windows;
  bool passed = false;

  std::string summary() const;
};

inline constexpr double kStochasticTolerance = 1e-12;

/// Checks double stochasticity, the positive-entry bound w and strong
/// connectivity of every window of B consecutive rounds.
ValidationReport validate_mixing_sequence(const GraphSequence& seq);

/// True when the directed graph with edges j -> i for adjacency(i, j) > 0 is
/// strongly connected.
bool strongly_connected(const Eigen::Ref<const Eigen::MatrixXi>& adjacency);

/// One consensus step: row i of the result is sum_j W_ij * row j of X.
template <typename Derived>
Matrix mix_states(const MixingMatrix& W,
                  const Eigen::MatrixBase<Derived>& states) {
  if (states.rows() != W.size()) {
    throw ArgumentError("mix_states: state rows must match matrix size");
  }
  return W.weights() * states;
}

/// Writes `round,i,j,weight` rows for every positive entry.
void write_graph_csv(const GraphSequence& seq, std::ostream& out,
                     Index first_round = 1);

}  // namespace distoco
