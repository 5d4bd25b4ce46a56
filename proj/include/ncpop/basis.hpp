#ifndef NCPOP_BASIS_HPP
#define NCPOP_BASIS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncpop/word.hpp"

namespace ncpop {

/// Raised when a relaxation would need more words than the configured limit.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::uint64_t default_basis_limit = 2'000'000;

/// All words of degree <= d over n letters in graded-lex order (W_d).
/// Word positions coincide with word_rank, so lookups are arithmetic.
class WordBasis {
 public:
  WordBasis() = default;
  WordBasis(int nvars, int degree, std::uint64_t limit = default_basis_limit) : nvars_(nvars), degree_(degree) {
    if (nvars < 1) throw std::invalid_argument("WordBasis: need at least one letter");
    if (degree < 0) throw std::invalid_argument("WordBasis: negative degree");
    const std::uint64_t count = word_count(degree, nvars);
    if (count > limit)
      throw SizeLimitError("WordBasis: s(" + std::to_string(degree) + "," + std::to_string(nvars) +
                           ") words exceed the limit of " + std::to_string(limit));
    words_.reserve(count);
    words_.emplace_back();
    std::size_t level_begin = 0;
    for (int len = 1; len <= degree; ++len) {
      const std::size_t level_end = words_.size();
      for (std::size_t k = level_begin; k < level_end; ++k)
        for (int l = 1; l <= nvars; ++l) words_.push_back(words_[k] * Word::letter(l));
      level_begin = level_end;
    }
  }

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<Word>& words() const { return words_; }
  const Word& operator[](std::size_t i) const { return words_[i]; }
  auto begin() const { return words_.begin(); }
  auto end() const { return words_.end(); }

  bool contains(const Word& w) const { return w.degree() <= degree_ && w.max_letter() <= nvars_; }

  std::size_t index(const Word& w) const {
    if (!contains(w)) throw std::out_of_range("WordBasis: word outside the basis");
    return static_cast<std::size_t>(word_rank(w, nvars_));
  }

 private:
  int nvars_ = 0;
  int degree_ = 0;
  std::vector<Word> words_;
};

inline WordBasis enumerate_basis(int n, int d, std::uint64_t limit = default_basis_limit) {
  return WordBasis(n, d, limit);
}

}  // namespace ncpop

#endif  // NCPOP_BASIS_HPP
