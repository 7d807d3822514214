#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace distoco {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an argument violates an operation's stated precondition
/// (dimension mismatch, out-of-range parameter, point outside a set).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for decision sets an operation cannot handle (e.g. shrinking a
/// set that is not symmetric around the origin).
class UnsupportedSetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot deliver its contract, e.g. a
/// comparator solve that does not reach the feasibility tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleComparatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ArgumentError(message);
}

/// SplitMix64: a counter-style generator. Every (seed, key...) tuple maps to
/// an independent stream, so any round can be regenerated without replaying
/// the rounds before it.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Derives a stream seed from a master seed and a list of integer keys.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> keys) {
  SplitMix64 mixer(master);
  std::uint64_t h = mixer();
  for (std::uint64_t k : keys) {
    SplitMix64 step(h ^ (k + 0x632be59bd9b4e019ULL));
    h = step();
  }
  return h;
}

/// Stream purposes used with derive_seed.
enum class StreamPurpose : std::uint64_t {
  kLoss = 1,
  kConstraint = 2,
  kGraph = 3,
  kExploration = 4,
};

}  // namespace distoco
