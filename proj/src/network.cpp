#include "distoco/network.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace distoco {

MixingMatrix::MixingMatrix(Matrix weights, double min_weight)
    : W_(std::move(weights)), w_(min_weight) {
  require(W_.rows() == W_.cols() && W_.rows() >= 1,
          "MixingMatrix: weights must be square and nonempty");
  require(W_.allFinite(), "MixingMatrix: weights must be finite");
  require(min_weight > 0.0 && min_weight < 1.0 + 1e-15,
          "MixingMatrix: min weight must lie in (0, 1]");
}

std::vector<Index> MixingMatrix::in_neighbors(Index i) const {
  std::vector<Index> out;
  for (Index j = 0; j < size(); ++j) {
    if (j != i && W_(i, j) > 0.0) out.push_back(j);
  }
  return out;
}

MixingConstants mixing_constants(double w, Index n, Index window) {
  require(w > 0.0 && w < 1.0, "mixing_constants: w must lie in (0, 1)");
  require(n >= 1, "mixing_constants: n must be >= 1");
  require(window >= 1, "mixing_constants: B must be >= 1");
  const double nn = static_cast<double>(n);
  const double base = 1.0 - w / (4.0 * nn * nn);
  return {std::pow(base, -2.0),
          std::pow(base, 1.0 / static_cast<double>(window))};
}

MixingConstants GraphSequence::constants() const {
  require(!matrices.empty(), "GraphSequence: empty sequence");
  double w = 1.0;
  for (const auto& m : matrices) w = std::min(w, m.min_weight());
  // The contraction constants need w < 1; a single-agent network has w = 1.
  w = std::min(w, std::nextafter(1.0, 0.0));
  return mixing_constants(w, matrices.front().size(), window);
}

MixingMatrix generate_er_path_mixing(Index n, double rho, Index round,
                                     std::uint64_t seed) {
  require(n >= 2, "generate_er_path_mixing: n must be >= 2");
  require(rho >= 0.0 && rho <= 1.0,
          "generate_er_path_mixing: rho must lie in [0, 1]");
  SplitMix64 rng(derive_seed(
      seed, {static_cast<std::uint64_t>(StreamPurpose::kGraph),
             static_cast<std::uint64_t>(round)}));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double weight = 1.0 / static_cast<double>(n);

  Matrix W = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      // Always draw so the stream layout does not depend on rho.
      const bool random_edge = coin(rng) < rho;
      if (random_edge || j == i + 1) {
        W(i, j) = weight;
        W(j, i) = weight;
      }
    }
  }
  // 1 - sum_{j != i} W_ij, written as (n - deg_i)/n so that it is never
  // rounded below 1/n.
  for (Index i = 0; i < n; ++i) {
    const Index degree = (W.row(i).array() > 0.0).count();
    W(i, i) = static_cast<double>(n - degree) / static_cast<double>(n);
    if (!(W(i, i) >= weight)) {
      throw NumericalError("generate_er_path_mixing: diagonal below 1/n");
    }
  }
  return MixingMatrix(std::move(W), weight);
}

bool strongly_connected(const Eigen::Ref<const Eigen::MatrixXi>& adjacency) {
  const Index n = adjacency.rows();
  if (n <= 1) return true;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index count = 1;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index u = 0; u < n; ++u) {
        const int edge = transpose ? adjacency(u, v) : adjacency(v, u);
        if (edge != 0 && !seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

ValidationReport validate_mixing_sequence(const GraphSequence& seq) {
  require(!seq.matrices.empty(), "validate_mixing_sequence: empty sequence");
  require(seq.window >= 1, "validate_mixing_sequence: B must be >= 1");
  const Index n = seq.matrices.front().size();
  ValidationReport report;
  bool ok = true;

  Index round = 1;
  for (const auto& m : seq.matrices) {
    require(m.size() == n, "validate_mixing_sequence: size changes over time");
    const Matrix& W = m.weights();
    MatrixCheck check;
    check.round = round++;
    check.row_residual = (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
    check.col_residual = (W.colwise().sum().array() - 1.0).abs().maxCoeff();
    check.nonnegative = (W.array() >= 0.0).all();
    check.diagonal_positive = (W.diagonal().array() > 0.0).all();
    double min_pos = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (W(i, j) > 0.0) min_pos = std::min(min_pos, W(i, j));
    check.min_positive = min_pos;
    check.passed = check.row_residual <= kStochasticTolerance &&
                   check.col_residual <= kStochasticTolerance &&
                   check.nonnegative && check.diagonal_positive &&
                   min_pos >= m.min_weight();
    ok = ok && check.passed;
    report.matrices.push_back(check);
  }

  const Index T = static_cast<Index>(seq.matrices.size());
  const Index B = std::min(seq.window, T);
  for (Index start = 0; start + B <= T; ++start) {
    Eigen::MatrixXi adjacency = Eigen::MatrixXi::Zero(n, n);
    for (Index l = start; l < start + B; ++l) {
      const Matrix& W = seq.matrices[static_cast<std::size_t>(l)].weights();
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          if (i != j && W(i, j) > 0.0) adjacency(i, j) = 1;
    }
    WindowCheck window{start + 1, start + B, strongly_connected(adjacency)};
    ok = ok && window.strongly_connected;
    report.windows.push_back(window);
  }
  report.passed = ok;
  return report;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  double row = 0.0, col = 0.0, min_pos = std::numeric_limits<double>::infinity();
  Index bad_matrices = 0;
  for (const auto& m : matrices) {
    row = std::max(row, m.row_residual);
    col = std::max(col, m.col_residual);
    min_pos = std::min(min_pos, m.min_positive);
    if (!m.passed) ++bad_matrices;
  }
  Index bad_windows = 0;
  for (const auto& w : windows)
    if (!w.strongly_connected) ++bad_windows;
  os << "rounds: " << matrices.size() << '\n'
     << "max row-sum residual: " << row << '\n'
     << "max column-sum residual: " << col << '\n'
     << "min positive weight: " << min_pos << '\n'
     << "matrices failing checks: " << bad_matrices << '\n'
     << "windows checked: " << windows.size() << '\n'
     << "windows not strongly connected: " << bad_windows << '\n'
     << "result: " << (passed ? "PASS" : "FAIL") << '\n';
  return os.str();
}

void write_graph_csv(const GraphSequence& seq, std::ostream& out,
                     Index first_round) {
  out << "round,i,j,weight\n";
  out.precision(17);
  Index round = first_round;
  for (const auto& m : seq.matrices) {
    for (Index i = 0; i < m.size(); ++i)
      for (Index j = 0; j < m.size(); ++j)
        if (m(i, j) > 0.0)
          out << round << ',' << i << ',' << j << ',' << m(i, j) << '\n';
    ++round;
  }
}

}  // namespace distoco
