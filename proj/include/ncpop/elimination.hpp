#ifndef NCPOP_ELIMINATION_HPP
#define NCPOP_ELIMINATION_HPP

#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "ncpop/rational.hpp"

namespace ncpop {

/// Sparse linear form over moment variables (class id -> coefficient).
using LinearForm = std::map<int, Rational>;

struct LinearEquality {
  LinearForm lhs;
  Rational rhs;
};

class InconsistentSystemError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Solution set {y : E y = r} written as y = offset + lift * z.
/// `free_vars[j]` is the variable that z_j stands for.
struct AffineParametrization {
  int num_vars = 0;
  std::vector<Rational> offset;
  std::vector<int> free_vars;
  std::vector<int> pivots;
  /// Column j holds the exact coefficients of z_j.
  std::vector<std::map<int, Rational>> columns;
  /// y_c = offset_c + sum over (j, a) of a z_j
  std::vector<std::vector<std::pair<int, Rational>>> expression;

  /// a^T y as constant + sum_j coefficient_j z_j.
  std::pair<Rational, std::map<int, Rational>> substitute(const LinearForm& a) const {
    Rational constant(0);
    std::map<int, Rational> coef;
    for (const auto& [c, v] : a) {
      constant += v * offset[static_cast<std::size_t>(c)];
      for (const auto& [j, n] : expression[static_cast<std::size_t>(c)]) {
        Rational& slot = coef[j];
        slot += v * n;
        if (is_zero(slot)) coef.erase(j);
      }
    }
    return {constant, coef};
  }

  /// True when a^T y is identically zero on the solution set.
  bool vanishes(const LinearForm& a) const {
    auto [c, coef] = substitute(a);
    return is_zero(c) && coef.empty();
  }

  int num_free() const { return static_cast<int>(free_vars.size()); }

  Eigen::SparseMatrix<double> lift() const {
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t j = 0; j < columns.size(); ++j)
      for (const auto& [i, c] : columns[j]) t.emplace_back(i, static_cast<int>(j), to_double(c));
    Eigen::SparseMatrix<double> n(num_vars, num_free());
    n.setFromTriplets(t.begin(), t.end());
    return n;
  }

  Eigen::VectorXd offset_vector() const {
    Eigen::VectorXd v(num_vars);
    for (int i = 0; i < num_vars; ++i) v[i] = to_double(offset[static_cast<std::size_t>(i)]);
    return v;
  }

  /// y = offset + lift * z.
  Eigen::VectorXd expand(const Eigen::VectorXd& z) const { return offset_vector() + lift() * z; }
};

/// Exact reduced row echelon elimination. Each new row is reduced against
/// the current pivots and its largest remaining variable becomes a pivot,
/// so high-degree moments are expressed through lower ones.
inline AffineParametrization eliminate(int num_vars, const std::vector<LinearEquality>& rows) {
  struct PivotRow {
    LinearForm form;  // pivot coefficient is 1; contains no other pivot variable
    Rational rhs;
  };
  std::map<int, PivotRow> pivots;
  std::map<int, std::vector<int>> users;  // variable -> pivots whose row mentions it

  for (const auto& input : rows) {
    LinearForm r = input.lhs;
    Rational rhs = input.rhs;
    for (auto it = r.begin(); it != r.end();) {
      if (it->first < 0 || it->first >= num_vars) throw std::out_of_range("eliminate: variable index out of range");
      if (is_zero(it->second)) it = r.erase(it);
      else ++it;
    }
    // Reduce against existing pivots.
    std::vector<int> hit;
    for (const auto& [v, c] : r)
      if (pivots.count(v)) hit.push_back(v);
    for (int v : hit) {
      const Rational c = r.at(v);
      const PivotRow& p = pivots.at(v);
      for (const auto& [u, a] : p.form) {
        Rational& slot = r[u];
        slot -= c * a;
        if (is_zero(slot)) r.erase(u);
      }
      rhs -= c * p.rhs;
    }
    if (r.empty()) {
      if (!is_zero(rhs)) throw InconsistentSystemError("inconsistent linear equality constraints");
      continue;
    }
    const int piv = r.rbegin()->first;
    const Rational scale = r.rbegin()->second;
    for (auto& [u, a] : r) a /= scale;
    rhs /= scale;
    // Remove the new pivot from rows that mention it.
    auto uit = users.find(piv);
    if (uit != users.end()) {
      for (int q : uit->second) {
        auto pit = pivots.find(q);
        if (pit == pivots.end()) continue;
        PivotRow& row = pit->second;
        auto f = row.form.find(piv);
        if (f == row.form.end()) continue;
        const Rational c = f->second;
        for (const auto& [u, a] : r) {
          Rational& slot = row.form[u];
          slot -= c * a;
          if (is_zero(slot)) row.form.erase(u);
          else if (u != q) users[u].push_back(q);
        }
        row.rhs -= c * rhs;
      }
      users.erase(piv);
    }
    for (const auto& [u, a] : r)
      if (u != piv) users[u].push_back(piv);
    pivots.emplace(piv, PivotRow{std::move(r), rhs});
  }

  AffineParametrization out;
  out.num_vars = num_vars;
  out.offset.assign(static_cast<std::size_t>(num_vars), Rational(0));
  std::vector<int> column_of(static_cast<std::size_t>(num_vars), -1);
  for (int v = 0; v < num_vars; ++v) {
    if (pivots.count(v)) {
      out.pivots.push_back(v);
      continue;
    }
    column_of[static_cast<std::size_t>(v)] = static_cast<int>(out.free_vars.size());
    out.free_vars.push_back(v);
    out.columns.push_back({{v, Rational(1)}});
  }
  for (const auto& [piv, row] : pivots) {
    out.offset[static_cast<std::size_t>(piv)] = row.rhs;
    for (const auto& [u, a] : row.form) {
      if (u == piv) continue;
      const int j = column_of[static_cast<std::size_t>(u)];
      if (j < 0) throw std::logic_error("eliminate: pivot row not fully reduced");
      out.columns[static_cast<std::size_t>(j)][piv] = -a;
    }
  }
  out.expression.resize(static_cast<std::size_t>(num_vars));
  for (std::size_t j = 0; j < out.columns.size(); ++j)
    for (const auto& [i, a] : out.columns[j]) out.expression[static_cast<std::size_t>(i)].emplace_back(static_cast<int>(j), a);
  return out;
}

}  // namespace ncpop

#endif  // NCPOP_ELIMINATION_HPP
