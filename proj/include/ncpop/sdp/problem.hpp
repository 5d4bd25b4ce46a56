#ifndef NCPOP_SDP_PROBLEM_HPP
#define NCPOP_SDP_PROBLEM_HPP

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace ncpop::sdp {

/// One stored entry of a symmetric block matrix (0-based, row <= col).
struct Entry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse symmetric block-diagonal matrix stored by its upper triangle.
class BlockMatrix {
 public:
  /// Accumulates into entry (i, j) of block `block`; (j, i) is implied.
  void add(int block, int i, int j, double v) {
    if (i > j) std::swap(i, j);
    entries_.push_back({block, i, j, v});
    sorted_ = false;
  }

  /// Sorts by (block, row, col), merges duplicates and drops zeros.
  BlockMatrix& normalize() {
    if (sorted_) return *this;
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
    });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
      if (!merged.empty() && merged.back().block == e.block && merged.back().row == e.row &&
          merged.back().col == e.col)
        merged.back().value += e.value;
      else
        merged.push_back(e);
    }
    std::erase_if(merged, [](const Entry& e) { return e.value == 0.0; });
    entries_ = std::move(merged);
    sorted_ = true;
    return *this;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t nnz() const { return entries_.size(); }

  friend bool operator==(const BlockMatrix& a, const BlockMatrix& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  bool sorted_ = true;
};

/// A_j = sum_t lift(t, j) * basis[t]. Lets large structured relaxations
/// hand the solver a small set of disjoint-support basis matrices instead of
/// materializing every A_j.
struct FactoredConstraints {
  std::vector<BlockMatrix> basis;
  Eigen::SparseMatrix<double> lift;  // basis.size() x k
};

/// Standard primal form
///   maximize <C, X>  s.t.  <A_j, X> = b_j (j = 1..k),  X psd,
/// with dual  minimize b^T y  s.t.  Z = sum_j y_j A_j - C psd.
/// Block sizes follow the SDPA convention: negative means a diagonal block.
struct SdpProblem {
  std::vector<int> blocks;
  BlockMatrix C;
  std::vector<BlockMatrix> A;
  Eigen::VectorXd b;
  std::optional<FactoredConstraints> factored;

  int num_constraints() const { return static_cast<int>(b.size()); }

  int block_dim(int k) const { return std::abs(blocks.at(static_cast<std::size_t>(k))); }
  bool is_diagonal(int k) const { return blocks.at(static_cast<std::size_t>(k)) < 0; }

  bool has_explicit_constraints() const { return static_cast<int>(A.size()) == num_constraints(); }

  /// Copy with every A_j spelled out (the factored form is dropped).
  SdpProblem materialized() const {
    if (has_explicit_constraints() || !factored) {
      SdpProblem p = *this;
      p.factored.reset();
      return p;
    }
    SdpProblem p;
    p.blocks = blocks;
    p.C = C;
    p.b = b;
    p.A.resize(static_cast<std::size_t>(num_constraints()));
    const auto& lift = factored->lift;
    for (int j = 0; j < lift.outerSize(); ++j)
      for (Eigen::SparseMatrix<double>::InnerIterator it(lift, j); it; ++it)
        for (const auto& e : factored->basis[static_cast<std::size_t>(it.row())].entries())
          p.A[static_cast<std::size_t>(j)].add(e.block, e.row, e.col, it.value() * e.value);
    for (auto& a : p.A) a.normalize();
    return p;
  }

  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const {
    if (blocks.empty()) throw std::invalid_argument("SdpProblem: no blocks");
    for (int s : blocks)
      if (s == 0) throw std::invalid_argument("SdpProblem: zero block size");
    auto check = [&](const BlockMatrix& m, const std::string& name) {
      for (const auto& e : m.entries()) {
        if (e.block < 0 || e.block >= static_cast<int>(blocks.size()))
          throw std::invalid_argument(name + ": block index out of range");
        const int n = block_dim(e.block);
        if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n || e.row > e.col)
          throw std::invalid_argument(name + ": entry index out of range");
        if (is_diagonal(e.block) && e.row != e.col)
          throw std::invalid_argument(name + ": off-diagonal entry in a diagonal block");
      }
    };
    check(C, "C");
    if (factored) {
      if (factored->lift.rows() != static_cast<Eigen::Index>(factored->basis.size()) ||
          factored->lift.cols() != b.size())
        throw std::invalid_argument("SdpProblem: factored lift has wrong shape");
      for (const auto& m : factored->basis) check(m, "basis");
    }
    if (!has_explicit_constraints() && !factored)
      throw std::invalid_argument("SdpProblem: number of A_j differs from length of b");
    for (std::size_t j = 0; j < A.size(); ++j) check(A[j], "A_" + std::to_string(j + 1));
  }
};

}  // namespace ncpop::sdp

#endif  // NCPOP_SDP_PROBLEM_HPP
