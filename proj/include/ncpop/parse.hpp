#ifndef NCPOP_PARSE_HPP
#define NCPOP_PARSE_HPP

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ncpop/polynomial.hpp"

namespace ncpop {

/// Syntax error with a 1-based position. `line` is 0 when the input was a
/// single expression rather than a file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(where(line, column) + msg), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string where(int line, int column) {
    std::string s;
    if (line > 0) s += "line " + std::to_string(line) + ", ";
    return s + "column " + std::to_string(column) + ": ";
  }
  int line_;
  int column_;
};

struct ParseOptions {
  int nvars = 0;
  /// Accept `x`, `y` for x1, x2. Only honoured when nvars == 2.
  bool alias_xy = true;
  int line = 0;
};

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view text, const ParseOptions& opt) : text_(text), opt_(opt) {}

  NcPolynomial parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail("empty polynomial");
    NcPolynomial p = expr();
    skip_ws();
    if (pos_ < text_.size()) fail(std::string("unexpected character '") + text_[pos_] + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, opt_.line, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NcPolynomial expr() {
    NcPolynomial acc(opt_.nvars);
    bool negate = false;
    skip_ws();
    if (accept('+')) {
    } else if (accept('-')) {
      negate = true;
    }
    for (;;) {
      NcPolynomial t = term();
      if (negate) acc -= t;
      else acc += t;
      if (accept('+')) negate = false;
      else if (accept('-')) negate = true;
      else break;
    }
    return acc;
  }

  NcPolynomial term() {
    NcPolynomial acc = power();
    while (accept('*')) acc = acc * power();
    return acc;
  }

  NcPolynomial power() {
    NcPolynomial base = primary();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      long k = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        k = k * 10 + (text_[pos_] - '0');
        if (k > 1000) fail("exponent too large");
        ++pos_;
      }
      if (pos_ == start) fail("expected exponent after '^'");
      NcPolynomial r(opt_.nvars, Rational(1));
      for (long i = 0; i < k; ++i) r = r * base;
      return r;
    }
    return base;
  }

  NcPolynomial primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NcPolynomial inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == '-') {
      ++pos_;
      return -power();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      Rational v;
      std::size_t used = parse_rational_prefix(text_.substr(pos_), v);
      if (used == 0) fail("malformed number");
      pos_ += used;
      return NcPolynomial(opt_.nvars, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string_view name = text_.substr(start, pos_ - start);
      int idx = variable_index(name);
      if (idx == 0) {
        pos_ = start;
        fail("unknown variable '" + std::string(name) + "'");
      }
      return NcPolynomial::variable(opt_.nvars, idx);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  int variable_index(std::string_view name) const {
    if (opt_.alias_xy && opt_.nvars == 2) {
      if (name == "x") return 1;
      if (name == "y") return 2;
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int k = 0;
      for (std::size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return 0;
        k = k * 10 + (name[i] - '0');
        if (k > opt_.nvars) return 0;
      }
      return (k >= 1 && k <= opt_.nvars) ? k : 0;
    }
    return 0;
  }

  std::string_view text_;
  ParseOptions opt_;
  std::size_t pos_ = 0;
};

inline std::string letter_name(int letter, int nvars, bool alias) {
  if (alias && nvars == 2) return letter == 1 ? "x" : "y";
  return "x" + std::to_string(letter);
}

}  // namespace detail

/// Parses the polynomial grammar: sums and differences of products of
/// numbers (decimal, exponent or p/q), letters `x1..xN` (or `x`, `y` when
/// nvars is 2), powers `^k` and parenthesized subexpressions.
inline NcPolynomial parse_polynomial(std::string_view text, const ParseOptions& opt) {
  if (opt.nvars < 1) throw std::invalid_argument("parse_polynomial: nvars must be positive");
  return detail::PolyParser(text, opt).parse();
}

inline NcPolynomial parse_polynomial(std::string_view text, int nvars) {
  ParseOptions opt;
  opt.nvars = nvars;
  return parse_polynomial(text, opt);
}

/// `x*y^2` style rendering of a word; `1` for the empty word.
inline std::string to_string(const Word& w, int nvars, bool alias = true) {
  if (w.empty()) return "1";
  std::string s;
  const auto& l = w.letters();
  for (std::size_t i = 0; i < l.size();) {
    std::size_t j = i;
    while (j < l.size() && l[j] == l[i]) ++j;
    if (!s.empty()) s += '*';
    s += detail::letter_name(l[i], nvars, alias);
    if (j - i > 1) s += "^" + std::to_string(j - i);
    i = j;
  }
  return s;
}

/// Inverse of parse_polynomial on its image; doubles print with 17
/// significant digits so the round trip is exact.
template <class T>
std::string to_string(const Polynomial<T>& f, bool alias = true) {
  if (f.is_zero()) return "0";
  std::string s;
  for (const auto& [w, c] : f.terms()) {
    std::string coef = format_coefficient(c);
    bool negative = !coef.empty() && coef[0] == '-';
    if (negative) coef.erase(0, 1);
    if (s.empty()) {
      if (negative) s += '-';
    } else {
      s += negative ? "-" : "+";
    }
    if (w.empty()) {
      s += coef;
    } else {
      if (coef != "1") s += coef + "*";
      s += to_string(w, f.nvars(), alias);
    }
  }
  return s;
}

}  // namespace ncpop

#endif  // NCPOP_PARSE_HPP
