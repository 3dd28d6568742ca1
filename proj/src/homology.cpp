#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "acmorse/homology.hpp"

namespace acmorse {

Z2Matrix::Z2Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols, 0) {}

Z2Matrix Z2Matrix::times(const Z2Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("Z2Matrix::times: shape mismatch");
  Z2Matrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      if (!(*this)(i, k)) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j)
        out.a_[i * rhs.cols_ + j] ^= rhs(k, j);
    }
  return out;
}

int Z2Matrix::rank() const {
  std::vector<std::uint8_t> a = a_;
  int r = 0;
  for (std::size_t col = 0; col < cols_ && static_cast<std::size_t>(r) < rows_; ++col) {
    std::size_t pivot = rows_;
    for (std::size_t i = r; i < rows_; ++i)
      if (a[i * cols_ + col]) {
        pivot = i;
        break;
      }
    if (pivot == rows_) continue;
    for (std::size_t j = 0; j < cols_; ++j)
      std::swap(a[pivot * cols_ + j], a[static_cast<std::size_t>(r) * cols_ + j]);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == static_cast<std::size_t>(r) || !a[i * cols_ + col]) continue;
      for (std::size_t j = col; j < cols_; ++j)
        a[i * cols_ + j] ^= a[static_cast<std::size_t>(r) * cols_ + j];
    }
    ++r;
  }
  return r;
}

bool Z2Matrix::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](std::uint8_t v) { return v == 0; });
}

ChainComplex assemble_complex(const std::vector<SolutionPoint>& solutions,
                              const std::vector<ConnectionRecord>& counts) {
  ChainComplex cx;
  int top = -1;
  for (const SolutionPoint& s : solutions) {
    if (s.nullity > 0)
      throw std::invalid_argument("assemble_complex: degenerate solution present: '" + s.tag +
                                  "' (nullity " + std::to_string(s.nullity) + ")");
    top = std::max(top, s.index);
  }
  cx.generators.resize(top + 1);
  cx.generator_ids.resize(top + 1);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    cx.generators[solutions[i].index].push_back(solutions[i]);
    cx.generator_ids[solutions[i].index].push_back(i);
  }

  cx.boundaries.resize(top + 1);
  cx.reliability.resize(top + 1);
  if (top >= 0) {
    cx.boundaries[0] = Z2Matrix(0, cx.generators[0].size());
    cx.reliability[0] = "exact";
  }
  for (int k = 1; k <= top; ++k) {
    const auto& lower = cx.generator_ids[k - 1];
    const auto& upper = cx.generator_ids[k];
    Z2Matrix b(lower.size(), upper.size());
    std::string rel = "exact";
    for (std::size_t j = 0; j < upper.size(); ++j)
      for (std::size_t i = 0; i < lower.size(); ++i) {
        const ConnectionRecord* rec = nullptr;
        for (const ConnectionRecord& r : counts)
          if (r.from == upper[j] && r.to == lower[i]) {
            rec = &r;
            break;
          }
        if (!rec) {
          rel = "incomplete";
          continue;
        }
        b.set(i, j, rec->parity);
        if (!rec->exact && rel != "incomplete") rel = "heuristic";
      }
    cx.boundaries[k] = std::move(b);
    cx.reliability[k] = rel;
  }
  return cx;
}

std::vector<int> homology_ranks(const ChainComplex& cx, bool allow_heuristic) {
  const std::size_t degrees = cx.generators.size();
  if (degrees == 0) return {};
  for (std::size_t k = 0; k < degrees; ++k) {
    if (cx.reliability[k] == "incomplete")
      throw std::invalid_argument("homology_ranks: boundary in degree " + std::to_string(k) +
                                  " is incomplete; connection counts are missing");
    if (cx.reliability[k] == "heuristic" && !allow_heuristic)
      throw std::invalid_argument("homology_ranks: boundary in degree " + std::to_string(k) +
                                  " is heuristic; pass allow_heuristic to use it");
  }
  for (std::size_t k = 0; k + 1 < degrees; ++k)
    if (!cx.boundaries[k].times(cx.boundaries[k + 1]).is_zero())
      throw std::invalid_argument(
          "homology_ranks: the boundary maps do not square to zero in degrees " +
          std::to_string(k + 1) + " -> " + std::to_string(k) +
          "; some connection count is wrong");

  std::vector<int> ranks(degrees, 0);
  for (std::size_t k = 0; k < degrees; ++k) {
    const int dim = static_cast<int>(cx.generators[k].size());
    const int rk = cx.boundaries[k].rank();  // rank of d_k out of degree k
    const int rk1 = k + 1 < degrees ? cx.boundaries[k + 1].rank() : 0;
    ranks[k] = dim - rk - rk1;
  }
  return ranks;
}

ParityReport parity_report(const std::vector<SolutionPoint>& solutions, int l,
                           const Eigen::VectorXd& w) {
  ParityReport rep;
  rep.l = l;
  int top = l;
  for (const SolutionPoint& s : solutions) top = std::max(top, s.index);
  rep.counts.assign(top + 1, 0);
  for (const SolutionPoint& s : solutions) ++rep.counts[s.index];

  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (solutions[i].u.sup_norm() <= 1e-8) continue;  // the zero state is self-negating
    bool hit = false;
    for (std::size_t j = 0; j < solutions.size(); ++j)
      if (norm_w(solutions[i].u.values + solutions[j].u.values, w) <= 1e-4) {
        hit = true;
        break;
      }
    if (!hit)
      rep.failures.push_back("unpaired witness: '" + solutions[i].tag +
                             "' has no negative in the set");
  }
  for (int k = 0; k <= top; ++k) {
    const bool want_odd = k == l;
    if ((rep.counts[k] % 2 == 1) != want_odd)
      rep.failures.push_back("degree " + std::to_string(k) + " has " +
                             std::to_string(rep.counts[k]) + " member(s); expected " +
                             (want_odd ? "odd" : "even"));
  }
  rep.verdict = rep.failures.empty() ? "PASS" : "FAIL";
  return rep;
}

std::string ParityReport::to_text() const {
  std::ostringstream os;
  os << "cardinality parity check, expected odd degree l = " << l << "\n";
  os << "verdict: " << verdict << "\n";
  for (std::size_t k = 0; k < counts.size(); ++k)
    os << "  degree " << k << ": " << counts[k] << " member(s)\n";
  for (const std::string& f : failures) os << "failure: " << f << "\n";
  return os.str();
}

}  // namespace acmorse
