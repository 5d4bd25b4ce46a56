#ifndef NCPOP_MOMENT_HPP
#define NCPOP_MOMENT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ncpop/basis.hpp"
#include "ncpop/elimination.hpp"
#include "ncpop/mode.hpp"
#include "ncpop/polynomial.hpp"

namespace ncpop {

/// Identification of the words of degree <= 2d into moment variables.
/// Class ids follow the graded lex order of the class representatives, so the
/// class of the empty word is 0.
class MomentLayout {
 public:
  MomentLayout(int nvars, int d, Mode mode, std::uint64_t limit = default_basis_limit)
      : nvars_(nvars), d_(d), mode_(mode), basis_(nvars, d, limit) {
    const std::uint64_t count = word_count(2 * d, nvars);
    if (count > limit) throw SizeLimitError("MomentLayout: " + std::to_string(count) + " words of degree <= 2d exceed the limit");
    std::vector<Word> canon;
    canon.reserve(static_cast<std::size_t>(count));
    {
      const WordBasis all(nvars, 2 * d, limit);
      for (const auto& w : all) canon.push_back(mode == Mode::Eigenvalue ? involution_canonical(w) : cyclic_canonical(w));
    }
    std::vector<Word> reps = canon;
    std::sort(reps.begin(), reps.end());
    reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
    // Canonical words are themselves words of degree <= 2d, so their rank
    // indexes a dense lookup table.
    std::vector<int> id_of_rank(canon.size(), -1);
    for (std::size_t i = 0; i < reps.size(); ++i) id_of_rank[static_cast<std::size_t>(word_rank(reps[i], nvars))] = static_cast<int>(i);
    class_of_.resize(canon.size());
    for (std::size_t r = 0; r < canon.size(); ++r)
      class_of_[r] = id_of_rank[static_cast<std::size_t>(word_rank(canon[r], nvars))];
    reps_ = std::move(reps);
  }

  int nvars() const { return nvars_; }
  int order() const { return d_; }
  Mode mode() const { return mode_; }
  const WordBasis& basis() const { return basis_; }
  int num_classes() const { return static_cast<int>(reps_.size()); }
  const std::vector<Word>& representatives() const { return reps_; }
  const Word& representative(int c) const { return reps_.at(static_cast<std::size_t>(c)); }

  bool covers(const Word& w) const { return w.degree() <= 2 * d_ && w.max_letter() <= nvars_; }

  int class_of(const Word& w) const {
    if (!covers(w)) throw std::out_of_range("MomentLayout: word outside the layout");
    return class_of_[static_cast<std::size_t>(word_rank(w, nvars_))];
  }

  /// y_{class(u* v)} for basis indices u, v.
  int entry_class(std::size_t u, std::size_t v) const { return class_of(basis_[u].star() * basis_[v]); }

  /// Per-class sums of the coefficients of f (the linear functional L(f) in moment variables).
  LinearForm linear_form(const NcPolynomial& f) const {
    LinearForm out;
    for (const auto& [w, c] : f.terms()) {
      Rational& slot = out[class_of(w)];
      slot += c;
      if (is_zero(slot)) out.erase(class_of(w));
    }
    return out;
  }

  /// M_d(y) with M_{u,v} = y_{class(u* v)}.
  Eigen::MatrixXd moment_matrix(const Eigen::VectorXd& y) const {
    const auto s = static_cast<Eigen::Index>(basis_.size());
    Eigen::MatrixXd m(s, s);
    for (Eigen::Index u = 0; u < s; ++u)
      for (Eigen::Index v = 0; v < s; ++v) m(u, v) = y[entry_class(static_cast<std::size_t>(u), static_cast<std::size_t>(v))];
    return m;
  }

 private:
  int nvars_;
  int d_;
  Mode mode_;
  WordBasis basis_;
  std::vector<int> class_of_;  // indexed by word_rank
  std::vector<Word> reps_;
};

inline MomentLayout build_layout(int n, int d, Mode mode, std::uint64_t limit = default_basis_limit) {
  if (n < 1 || d < 0) throw std::invalid_argument("build_layout: need n >= 1 and d >= 0");
  return MomentLayout(n, d, mode, limit);
}

/// Hankel matrix of a linear functional given on words. The functional
/// must be constant on every class met by the layout.
inline Eigen::MatrixXd hankel_from_functional(const std::function<double(const Word&)>& L, const MomentLayout& layout,
                                              double tol = 1e-9) {
  const int nc = layout.num_classes();
  std::vector<double> value(static_cast<std::size_t>(nc), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(nc), 0);
  const WordBasis all(layout.nvars(), 2 * layout.order());
  for (const auto& w : all) {
    const int c = layout.class_of(w);
    const double v = L(w);
    auto& slot = value[static_cast<std::size_t>(c)];
    if (!seen[static_cast<std::size_t>(c)]) {
      slot = v;
      seen[static_cast<std::size_t>(c)] = 1;
    } else if (std::abs(slot - v) > tol * (1.0 + std::abs(slot))) {
      throw std::invalid_argument("hankel_from_functional: functional not constant on the class of " +
                                  std::to_string(c));
    }
  }
  return layout.moment_matrix(Eigen::Map<Eigen::VectorXd>(value.data(), nc));
}

/// Localizing matrix M_{d - d_g}(gL) as a matrix of linear forms in the
/// moment variables: entry (u, v) is sum_w g_w y_{class(u* w v)}.
struct LocalizingTemplate {
  NcPolynomial g{1};
  int dg = 0;
  WordBasis rows{1, 0};
  std::vector<LinearForm> entries;  // row-major, rows.size()^2

  std::size_t size() const { return rows.size(); }
  const LinearForm& at(std::size_t u, std::size_t v) const { return entries[u * rows.size() + v]; }

  Eigen::MatrixXd instantiate(const Eigen::VectorXd& y) const {
    const auto s = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(s, s);
    for (Eigen::Index u = 0; u < s; ++u)
      for (Eigen::Index v = 0; v < s; ++v) {
        double acc = 0.0;
        for (const auto& [c, a] : at(static_cast<std::size_t>(u), static_cast<std::size_t>(v))) acc += to_double(a) * y[c];
        m(u, v) = acc;
      }
    return m;
  }
};

/// d_g = ceil(deg g / 2); the constant polynomial has d_g = 0.
inline int localizing_degree(const NcPolynomial& g) {
  if (g.is_zero()) throw std::invalid_argument("constraint polynomial is zero");
  return *g.half_degree();
}

namespace detail {

inline LinearForm localizing_entry(const MomentLayout& layout, const NcPolynomial& g, const Word& us, const Word& v) {
  LinearForm form;
  for (const auto& [w, c] : g.terms()) {
    const int cls = layout.class_of(us * w * v);
    Rational& slot = form[cls];
    slot += c;
    if (is_zero(slot)) form.erase(cls);
  }
  return form;
}

inline void check_constraint(const MomentLayout& layout, const NcPolynomial& g, int dg) {
  if (dg > layout.order())
    throw std::domain_error("constraint degree " + std::to_string(dg) + " exceeds relaxation order " +
                            std::to_string(layout.order()));
  for (const auto& [w, c] : g.terms())
    if (w.max_letter() > layout.nvars()) throw std::invalid_argument("constraint uses a letter beyond nvars");
}

}  // namespace detail

inline LocalizingTemplate build_localizing(const MomentLayout& layout, const NcPolynomial& g) {
  const int dg = localizing_degree(g);
  if (!g.is_symmetric()) throw std::invalid_argument("build_localizing: g must be symmetric");
  detail::check_constraint(layout, g, dg);
  LocalizingTemplate t{g, dg, WordBasis(layout.nvars(), layout.order() - dg), {}};
  const std::size_t s = t.rows.size();
  t.entries.reserve(s * s);
  for (std::size_t u = 0; u < s; ++u) {
    const Word us = t.rows[u].star();
    for (std::size_t v = 0; v < s; ++v) t.entries.push_back(detail::localizing_entry(layout, g, us, t.rows[v]));
  }
  return t;
}

/// One zero-localizing row: `form` = scale * L(u* h v) in class variables.
struct EqualityRow {
  LinearForm form;
  Word u;
  Word v;
  Rational scale;
};

/// Rows L(u* h v) = 0 for all u, v of degree <= d - d_h, each scaled so its
/// lowest class has coefficient 1, deduplicated, with the (u, v) that first
/// produced them.
inline std::vector<EqualityRow> equality_rows_with_sources(const MomentLayout& layout, const NcPolynomial& h) {
  if (h.is_zero()) return {};
  const int dh = *h.half_degree();
  detail::check_constraint(layout, h, dh);
  const WordBasis rows(layout.nvars(), layout.order() - dh);
  std::set<LinearForm> seen;
  std::vector<EqualityRow> out;
  for (const auto& u : rows) {
    const Word us = u.star();
    for (const auto& v : rows) {
      LinearForm form = detail::localizing_entry(layout, h, us, v);
      if (form.empty()) continue;
      const Rational scale = Rational(1) / form.begin()->second;
      for (auto& [c, a] : form) a *= scale;
      if (seen.insert(form).second) out.push_back({std::move(form), u, v, scale});
    }
  }
  return out;
}

inline std::vector<LinearForm> equality_rows(const MomentLayout& layout, const NcPolynomial& h) {
  std::vector<LinearForm> out;
  for (auto& r : equality_rows_with_sources(layout, h)) out.push_back(std::move(r.form));
  return out;
}

}  // namespace ncpop

#endif  // NCPOP_MOMENT_HPP
