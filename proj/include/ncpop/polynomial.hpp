#ifndef NCPOP_POLYNOMIAL_HPP
#define NCPOP_POLYNOMIAL_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

#include "ncpop/rational.hpp"
#include "ncpop/word.hpp"

namespace ncpop {

/// Element of R<x_1..x_n>: a sparse map from words to nonzero coefficients.
template <class T>
class Polynomial {
 public:
  using Scalar = T;
  using Terms = std::map<Word, T>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) { check_nvars(); }
  Polynomial(int nvars, T constant) : nvars_(nvars) {
    check_nvars();
    add_term(Word{}, std::move(constant));
  }
  Polynomial(int nvars, const Word& w, T coeff = T(1)) : nvars_(nvars) {
    check_nvars();
    add_term(w, std::move(coeff));
  }

  static Polynomial variable(int nvars, int i) { return Polynomial(nvars, Word::letter(i)); }

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  T coefficient(const Word& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? T(0) : it->second;
  }

  /// Adds c·w, dropping the term if it cancels.
  void add_term(const Word& w, const T& c) {
    if (ncpop::is_zero(c)) return;
    if (w.max_letter() > nvars_) throw std::invalid_argument("Polynomial: letter index exceeds nvars");
    auto [it, inserted] = terms_.try_emplace(w, c);
    if (!inserted) {
      it->second += c;
      if (ncpop::is_zero(it->second)) terms_.erase(it);
    }
  }

  /// Length of the longest word; nullopt for the zero polynomial.
  std::optional<int> degree() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.rbegin()->first.degree();  // grlex order puts longest words last
  }

  /// Half-degree d_g = ceil(deg/2); zero polynomial has none.
  std::optional<int> half_degree() const {
    auto d = degree();
    if (!d) return std::nullopt;
    return (*d + 1) / 2;
  }

  Polynomial star() const {
    Polynomial r(nvars_);
    for (const auto& [w, c] : terms_) r.terms_.emplace(w.star(), c);
    return r;
  }

  bool is_symmetric() const {
    for (const auto& [w, c] : terms_) {
      if (w.is_symmetric()) continue;
      auto it = terms_.find(w.star());
      if (it == terms_.end() || it->second != c) return false;
    }
    return true;
  }

  /// (f + f*)/2.
  Polynomial symmetrized() const {
    Polynomial r(nvars_);
    for (const auto& [w, c] : terms_) {
      T half = c / T(2);
      r.add_term(w, half);
      r.add_term(w.star(), half);
    }
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    merge_nvars(o);
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    merge_nvars(o);
    for (const auto& [w, c] : o.terms_) add_term(w, -c);
    return *this;
  }
  Polynomial& operator*=(const T& s) {
    if (ncpop::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [w, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= T(-1); }
  friend Polynomial operator*(Polynomial a, const T& s) { return a *= s; }
  friend Polynomial operator*(const T& s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r(std::max(a.nvars_, b.nvars_));
    for (const auto& [u, cu] : a.terms_)
      for (const auto& [v, cv] : b.terms_) r.add_term(u * v, cu * cv);
    return r;
  }

  Polynomial& operator+=(const T& s) {
    add_term(Word{}, s);
    return *this;
  }
  Polynomial& operator-=(const T& s) {
    add_term(Word{}, -s);
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const T& s) { return a += s; }
  friend Polynomial operator-(Polynomial a, const T& s) { return a -= s; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  /// Coefficientwise conversion, e.g. exact rationals to doubles.
  template <class U, class F>
  Polynomial<U> map_coefficients(F&& f) const {
    Polynomial<U> r(nvars_);
    for (const auto& [w, c] : terms_) r.add_term(w, f(c));
    return r;
  }

  Polynomial<double> to_double() const {
    return map_coefficients<double>([](const T& c) { return ncpop::to_double(c); });
  }

 private:
  void check_nvars() const {
    if (nvars_ < 0) throw std::invalid_argument("Polynomial: negative nvars");
  }
  void merge_nvars(const Polynomial& o) { nvars_ = std::max(nvars_, o.nvars_); }

  int nvars_ = 0;
  Terms terms_;
};

using NcPolynomial = Polynomial<Rational>;
using NcPolynomialD = Polynomial<double>;

template <class T>
Polynomial<T> involution(const Polynomial<T>& f) {
  return f.star();
}

inline NcPolynomial to_rational(const NcPolynomialD& f) {
  return f.map_coefficients<Rational>([](double c) { return exact_rational(c); });
}

/// Sums of coefficients over rotation classes; zero sums are dropped.
template <class T>
std::map<Word, T> cyclic_class_sums(const Polynomial<T>& f) {
  std::map<Word, T> sums;
  for (const auto& [w, c] : f.terms()) sums[rotation_canonical(w)] += c;
  std::erase_if(sums, [](const auto& kv) { return ncpop::is_zero(kv.second); });
  return sums;
}

/// f ~cyc g: the class sums of f - g vanish. With tol > 0 the comparison is
/// approximate (meaningful for floating-point coefficients).
template <class T>
bool cyclically_equivalent(const Polynomial<T>& f, const Polynomial<T>& g, double tol = 0.0) {
  if (f.nvars() != g.nvars() && !f.is_zero() && !g.is_zero())
    throw std::invalid_argument("cyclically_equivalent: nvars mismatch");
  auto sums = cyclic_class_sums(f - g);
  if (tol <= 0.0) return sums.empty();
  for (const auto& [w, c] : sums)
    if (std::abs(ncpop::to_double(c)) > tol) return false;
  return true;
}

}  // namespace ncpop

#endif  // NCPOP_POLYNOMIAL_HPP
