#ifndef NCPOP_WORD_HPP
#define NCPOP_WORD_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ncpop {

/// Element of the free monoid on letters 1..n. The empty word is the unit 1.
class Word {
 public:
  using Letter = int;

  Word() = default;
  Word(std::initializer_list<Letter> letters) : letters_(letters) { check(); }
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) { check(); }

  static Word letter(Letter i) { return Word({i}); }

  const std::vector<Letter>& letters() const { return letters_; }
  int degree() const { return static_cast<int>(letters_.size()); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t k) const { return letters_[k]; }
  Letter max_letter() const {
    return letters_.empty() ? 0 : *std::max_element(letters_.begin(), letters_.end());
  }

  /// Involution: w* is the reversal of w.
  Word star() const {
    Word r;
    r.letters_.assign(letters_.rbegin(), letters_.rend());
    return r;
  }

  bool is_symmetric() const { return std::equal(letters_.begin(), letters_.end(), letters_.rbegin()); }

  Word& operator*=(const Word& other) {
    letters_.insert(letters_.end(), other.letters_.begin(), other.letters_.end());
    return *this;
  }
  friend Word operator*(Word a, const Word& b) { return a *= b; }

  /// Cyclic rotation moving the first k letters to the end.
  Word rotated(std::size_t k) const {
    Word r;
    if (letters_.empty()) return r;
    k %= letters_.size();
    r.letters_.reserve(letters_.size());
    r.letters_.insert(r.letters_.end(), letters_.begin() + static_cast<std::ptrdiff_t>(k), letters_.end());
    r.letters_.insert(r.letters_.end(), letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(k));
    return r;
  }

  friend bool operator==(const Word&, const Word&) = default;

  /// Graded lexicographic order: shorter words first, then letterwise.
  friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
    if (a.letters_.size() != b.letters_.size()) return a.letters_.size() <=> b.letters_.size();
    return std::lexicographical_compare_three_way(a.letters_.begin(), a.letters_.end(), b.letters_.begin(),
                                                  b.letters_.end());
  }

 private:
  void check() const {
    for (auto l : letters_)
      if (l < 1) throw std::invalid_argument("Word: letter indices are 1-based");
  }

  std::vector<Letter> letters_;
};

inline Word word_mul(const Word& u, const Word& v) { return u * v; }

/// Graded-lex least rotation of w; two words are cyclically equivalent iff
/// these agree.
inline Word rotation_canonical(const Word& w) {
  if (w.degree() <= 1) return w;
  Word best = w;
  for (std::size_t k = 1; k < w.letters().size(); ++k) {
    Word a = w.rotated(k);
    if (a < best) best = std::move(a);
  }
  return best;
}

/// Graded-lex least element among all rotations of w and of w*. This is the
/// identification used by tracial functionals over real matrices, which
/// satisfy both L([p,q]) = 0 and L(f) = L(f*).
inline Word cyclic_canonical(const Word& w) {
  if (w.degree() <= 1) return w;
  Word best = w;
  const Word rev = w.star();
  for (std::size_t k = 0; k < w.letters().size(); ++k) {
    Word a = w.rotated(k);
    if (a < best) best = std::move(a);
    Word b = rev.rotated(k);
    if (b < best) best = std::move(b);
  }
  return best;
}

/// Representative of the class {w, w*}.
inline Word involution_canonical(const Word& w) {
  Word r = w.star();
  return r < w ? r : w;
}

/// s(d, n) = 1 + n + ... + n^d; returns max() on overflow.
inline std::uint64_t word_count(int d, int n) {
  if (d < 0) return 0;
  std::uint64_t total = 0, power = 1;
  constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
  for (int i = 0; i <= d; ++i) {
    if (total > cap - power) return cap;
    total += power;
    if (i < d) {
      if (n != 0 && power > cap / static_cast<std::uint64_t>(n)) return cap;
      power *= static_cast<std::uint64_t>(n);
    }
  }
  return total;
}

/// Position of w in the graded-lex enumeration of all words over n letters.
inline std::uint64_t word_rank(const Word& w, int n) {
  std::uint64_t r = 0;
  for (auto l : w.letters()) r = r * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(l - 1);
  return word_count(w.degree() - 1, n) + r;
}

/// Inverse of word_rank.
inline Word word_unrank(std::uint64_t rank, int n) {
  int len = 0;
  while (word_count(len, n) <= rank) ++len;
  std::uint64_t r = rank - word_count(len - 1, n);
  std::vector<Word::Letter> letters(static_cast<std::size_t>(len));
  for (int k = len - 1; k >= 0; --k) {
    letters[static_cast<std::size_t>(k)] = static_cast<Word::Letter>(r % static_cast<std::uint64_t>(n)) + 1;
    r /= static_cast<std::uint64_t>(n);
  }
  return Word(std::move(letters));
}

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (auto l : w.letters()) {
      h ^= static_cast<std::size_t>(l);
      h *= 0x100000001b3ull;
    }
    return h ^ w.letters().size();
  }
};

}  // namespace ncpop

#endif  // NCPOP_WORD_HPP
