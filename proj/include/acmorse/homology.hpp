/// @file homology.hpp
/// Mod-2 Morse chain complex over the computed stationary solutions:
/// generators bucketed by index, boundary matrices from connection
/// parities, Z2 linear algebra, homology ranks, and the cardinality-parity
/// report for symmetric solution sets.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acmorse/solver.hpp"

namespace acmorse {

/// Dense matrix over the field with two elements.
class Z2Matrix {
 public:
  Z2Matrix() = default;
  Z2Matrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  void set(std::size_t i, std::size_t j, int v) { a_[i * cols_ + j] = static_cast<std::uint8_t>(v & 1); }

  /// this * rhs over Z2; shapes must chain.
  Z2Matrix times(const Z2Matrix& rhs) const;
  /// Rank by Gaussian elimination over Z2.
  int rank() const;
  bool is_zero() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::uint8_t> a_;
};

/// A trusted or heuristic mod-2 connection count between two solutions,
/// positions referring to the assembling solution list.
struct ConnectionRecord {
  std::size_t from = 0;  // the higher-index solution
  std::size_t to = 0;    // index one below
  int parity = 0;
  bool exact = false;  // from an exhaustive (index-1) count
};

struct ChainComplex {
  /// generators[k] lists the solutions of index k; parallel generator_ids[k]
  /// keeps their positions in the original list.
  std::vector<std::vector<SolutionPoint>> generators;
  std::vector<std::vector<std::size_t>> generator_ids;
  /// boundaries[k] maps degree k to k-1, shape |gen_{k-1}| x |gen_k|;
  /// boundaries[0] is the empty map out of degree 0.
  std::vector<Z2Matrix> boundaries;
  /// Per boundary: "exact", "heuristic" (some counts sampled), or
  /// "incomplete" (some counts missing; homology is refused).
  std::vector<std::string> reliability;
};

/// Buckets nondegenerate solutions by index and fills each boundary matrix
/// from the supplied connection records. A record that is missing for some
/// (generator, generator-one-below) pair marks that matrix "incomplete"; a
/// non-exact record marks it "heuristic". Throws std::invalid_argument when
/// a degenerate solution is present (with its tag as witness).
ChainComplex assemble_complex(const std::vector<SolutionPoint>& solutions,
                              const std::vector<ConnectionRecord>& counts);

/// Homology ranks over Z2 per degree: rank_k = dim Ker d_k - rank d_{k+1}.
/// Verifies d_k d_{k+1} = 0 first and throws std::invalid_argument on
/// failure (a bad connection count), on any "incomplete" boundary, and on a
/// "heuristic" boundary unless allow_heuristic is set. An empty complex
/// yields an empty rank vector.
std::vector<int> homology_ranks(const ChainComplex& cx, bool allow_heuristic = false);

/// Cardinality parities of the index buckets of a negation-closed set.
struct ParityReport {
  std::string verdict;  // PASS | FAIL
  int l = 0;            // expected odd degree (the index of the zero solution)
  std::vector<int> counts;  // bucket size per degree
  std::vector<std::string> failures;
  std::string to_text() const;
};

/// Checks that the solution set is closed under u -> -u (an unpaired member
/// is a FAIL witness) and that the index buckets have even cardinality for
/// every degree except l, which must be odd (it carries the self-negating
/// zero solution). Degenerate members participate through their stored
/// index.
ParityReport parity_report(const std::vector<SolutionPoint>& solutions, int l,
                           const Eigen::VectorXd& w);

}  // namespace acmorse
