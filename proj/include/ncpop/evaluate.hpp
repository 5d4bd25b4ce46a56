#ifndef NCPOP_EVALUATE_HPP
#define NCPOP_EVALUATE_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ncpop/polynomial.hpp"

namespace ncpop {

/// f(A_1, ..., A_n): substitutes the matrix A_i for each letter x_i.
template <class T>
Eigen::MatrixXd evaluate(const Polynomial<T>& f, std::span<const Eigen::MatrixXd> point, double sym_tol = 1e-9) {
  if (static_cast<int>(point.size()) < f.nvars())
    throw std::invalid_argument("evaluate: expected " + std::to_string(f.nvars()) + " matrices");
  const Eigen::Index r = point.empty() ? 1 : point.front().rows();
  for (const auto& a : point) {
    if (a.rows() != r || a.cols() != r) throw std::invalid_argument("evaluate: matrices must share one square size");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > sym_tol * (1.0 + a.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("evaluate: matrices must be symmetric");
  }
  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(r, r);
  // Terms are in grlex order, so consecutive words often share prefixes.
  std::vector<Eigen::MatrixXd> prefix{Eigen::MatrixXd::Identity(r, r)};
  const Word* prev = nullptr;
  for (const auto& [w, c] : f.terms()) {
    std::size_t common = 0;
    if (prev) {
      const auto& a = prev->letters();
      const auto& b = w.letters();
      while (common < a.size() && common < b.size() && a[common] == b[common]) ++common;
    }
    prefix.resize(common + 1);
    for (std::size_t k = common; k < w.letters().size(); ++k)
      prefix.push_back(prefix.back() * point[static_cast<std::size_t>(w[k] - 1)]);
    result += to_double(c) * prefix.back();
    prev = &w;
  }
  return result;
}

template <class T>
Eigen::MatrixXd evaluate(const Polynomial<T>& f, const std::vector<Eigen::MatrixXd>& point) {
  return evaluate(f, std::span<const Eigen::MatrixXd>(point));
}

/// Normalized trace tr(A) = Tr(A)/r.
inline double normalized_trace(const Eigen::MatrixXd& a) { return a.trace() / static_cast<double>(a.rows()); }

}  // namespace ncpop

#endif  // NCPOP_EVALUATE_HPP
