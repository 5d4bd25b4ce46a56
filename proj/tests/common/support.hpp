#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ncpop/polynomial.hpp"

namespace ncpop::test {

inline Word random_word(std::mt19937_64& rng, int n, int max_degree) {
  std::uniform_int_distribution<int> len(0, max_degree), letter(1, n);
  std::vector<int> l(static_cast<std::size_t>(len(rng)));
  for (auto& x : l) x = letter(rng);
  return Word(std::move(l));
}

/// Sparse polynomial with small rational coefficients p/q.
inline NcPolynomial random_polynomial(std::mt19937_64& rng, int n, int max_degree, int terms) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 4);
  NcPolynomial f(n);
  for (int t = 0; t < terms; ++t) f.add_term(random_word(rng, n, max_degree), Rational(num(rng), den(rng)));
  return f;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int r, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd a(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

inline std::vector<Eigen::MatrixXd> random_point(std::mt19937_64& rng, int n, int r, double scale = 1.0) {
  std::vector<Eigen::MatrixXd> p;
  for (int i = 0; i < n; ++i) p.push_back(random_symmetric(rng, r, scale));
  return p;
}

}  // namespace ncpop::test
