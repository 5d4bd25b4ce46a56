#ifndef NCPOP_GRAM_HPP
#define NCPOP_GRAM_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ncpop/basis.hpp"
#include "ncpop/elimination.hpp"
#include "ncpop/mode.hpp"
#include "ncpop/polynomial.hpp"
#include "ncpop/sdp/problem.hpp"

namespace ncpop {

/// Upper-triangle entry of a constraint matrix A_w (row <= col).
struct GramEntry {
  int row = 0;
  int col = 0;
  Rational value;
};

struct GramConstraint {
  Word key;  // min(w, w*) or the cyclic canonical word
  std::vector<GramEntry> entries;
  Rational rhs;

  /// <A, G> for a dense symmetric G.
  template <class Derived>
  typename Derived::Scalar apply(const Eigen::MatrixBase<Derived>& G) const {
    using S = typename Derived::Scalar;
    S s(0);
    for (const auto& e : entries) {
      const S v = static_cast<S>(e.value);
      s += e.row == e.col ? v * G(e.row, e.col) : v * (G(e.row, e.col) + G(e.col, e.row));
    }
    return s;
  }
};

struct GramSystem {
  WordBasis basis;
  Mode mode = Mode::Eigenvalue;
  std::vector<GramConstraint> constraints;
  /// The polynomial the system encodes (symmetrized in eigenvalue mode).
  NcPolynomial target;
  bool symmetrized = false;
};

namespace detail {

inline Word gram_key(const Word& w, Mode mode) {
  return mode == Mode::Eigenvalue ? involution_canonical(w) : cyclic_canonical(w);
}

}  // namespace detail

/// Linear system <A_w, G> = b_w whose psd solutions G are exactly the Gram
/// matrices of f over W_d (eigenvalue mode), or of polynomials cyclically
/// equivalent to f (trace mode).
inline GramSystem build_gram_system(const NcPolynomial& f, int d, Mode mode,
                                    std::uint64_t limit = default_basis_limit) {
  if (d < 0) throw std::invalid_argument("build_gram_system: negative order");
  if (f.degree() && *f.degree() > 2 * d)
    throw std::domain_error("build_gram_system: deg f = " + std::to_string(*f.degree()) + " exceeds 2d = " +
                            std::to_string(2 * d));
  GramSystem sys{WordBasis(f.nvars(), d, limit), mode, {}, f, false};
  if (mode == Mode::Eigenvalue && !f.is_symmetric()) {
    sys.target = f.symmetrized();
    sys.symmetrized = true;
  }
  const auto& words = sys.basis.words();
  const int s = static_cast<int>(words.size());
  std::unordered_map<Word, std::size_t, WordHash> row_of;
  std::vector<Word> keys;
  std::vector<std::vector<std::pair<int, int>>> cells;
  for (int u = 0; u < s; ++u) {
    const Word us = words[static_cast<std::size_t>(u)].star();
    for (int v = u; v < s; ++v) {
      Word key = detail::gram_key(us * words[static_cast<std::size_t>(v)], mode);
      auto [it, inserted] = row_of.try_emplace(key, keys.size());
      if (inserted) {
        keys.push_back(std::move(key));
        cells.emplace_back();
      }
      cells[it->second].emplace_back(u, v);
    }
  }
  std::vector<std::size_t> order(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::unordered_map<Word, Rational, WordHash> rhs;
  for (const auto& [w, c] : sys.target.terms()) {
    Rational& slot = rhs[detail::gram_key(w, mode)];
    if (mode == Mode::Eigenvalue) slot += w.is_symmetric() ? Rational(2) * c : c;
    else slot += c;
  }
  // In eigenvalue mode the sum over a non-symmetric key already collects
  // f_w + f_{w*} because both words land on it.
  for (std::size_t i : order) {
    GramConstraint row;
    row.key = keys[i];
    const Rational value = (mode == Mode::Eigenvalue && row.key.is_symmetric()) ? Rational(2) : Rational(1);
    for (auto [u, v] : cells[i]) row.entries.push_back({u, v, value});
    auto r = rhs.find(row.key);
    row.rhs = r == rhs.end() ? Rational(0) : r->second;
    sys.constraints.push_back(std::move(row));
  }
  return sys;
}

/// Sum over u, v of G_{u,v} u* v.
template <class Derived>
Polynomial<typename Derived::Scalar> gram_to_poly(const Eigen::MatrixBase<Derived>& G, const WordBasis& basis) {
  using S = typename Derived::Scalar;
  const auto s = static_cast<Eigen::Index>(basis.size());
  if (G.rows() != s || G.cols() != s)
    throw std::invalid_argument("gram_to_poly: matrix size " + std::to_string(G.rows()) + "x" +
                                std::to_string(G.cols()) + " does not match basis size " + std::to_string(s));
  Polynomial<S> p(basis.nvars());
  for (Eigen::Index u = 0; u < s; ++u) {
    const Word us = basis[static_cast<std::size_t>(u)].star();
    for (Eigen::Index v = 0; v < s; ++v) {
      const S c = G(u, v);
      if (!is_zero(c)) p.add_term(us * basis[static_cast<std::size_t>(v)], c);
    }
  }
  return p;
}

struct SohsCertificate {
  std::vector<NcPolynomialD> summands;
  /// target - sum g_i* g_i
  NcPolynomialD residual{1};
  double residual_norm = 0.0;  // largest absolute residual coefficient
};

/// Sum of g* g over a list of polynomials.
inline NcPolynomialD sum_of_hermitian_squares(const std::vector<NcPolynomialD>& gs, int nvars) {
  NcPolynomialD acc(nvars);
  for (const auto& g : gs) acc += g.star() * g;
  return acc;
}

inline double max_abs_coefficient(const NcPolynomialD& p) {
  double m = 0.0;
  for (const auto& [w, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

/// Eigendecomposition G = sum lambda_k q_k q_k^T, keeping lambda_k > tol,
/// with g_k = sqrt(lambda_k) q_k^T w where w is the word vector indexing G.
/// Residuals are taken against `target` when given, else against the exact
/// expansion of G.
inline SohsCertificate extract_sohs(const Eigen::MatrixXd& G, const std::vector<Word>& words, int nvars,
                                    double tol = 1e-8, const std::optional<NcPolynomialD>& target = std::nullopt) {
  const auto s = static_cast<Eigen::Index>(words.size());
  if (G.rows() != s || G.cols() != s) throw std::invalid_argument("extract_sohs: size mismatch");
  const double scale = std::max(1.0, s ? G.cwiseAbs().maxCoeff() : 0.0);
  if (s && (G - G.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("extract_sohs: matrix is not symmetric");
  SohsCertificate cert;
  NcPolynomialD goal(nvars);
  if (target) {
    goal = *target;
  } else {
    for (Eigen::Index u = 0; u < s; ++u)
      for (Eigen::Index v = 0; v < s; ++v)
        if (G(u, v) != 0.0) goal.add_term(words[static_cast<std::size_t>(u)].star() * words[static_cast<std::size_t>(v)], G(u, v));
  }
  if (s > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()));
    const auto& lam = es.eigenvalues();
    if (lam.minCoeff() < -tol) throw std::domain_error("extract_sohs: Gram matrix is indefinite beyond tolerance");
    // Largest eigenvalues first.
    for (Eigen::Index k = s - 1; k >= 0; --k) {
      if (lam[k] <= tol) break;
      const Eigen::VectorXd q = std::sqrt(lam[k]) * es.eigenvectors().col(k);
      const double qmax = q.cwiseAbs().maxCoeff();
      NcPolynomialD g(nvars);
      for (Eigen::Index u = 0; u < s; ++u)
        if (std::abs(q[u]) > 1e-14 * qmax) g.add_term(words[static_cast<std::size_t>(u)], q[u]);
      cert.summands.push_back(std::move(g));
    }
  }
  cert.residual = goal - sum_of_hermitian_squares(cert.summands, nvars);
  cert.residual_norm = max_abs_coefficient(cert.residual);
  return cert;
}

inline SohsCertificate extract_sohs(const Eigen::MatrixXd& G, const WordBasis& basis, double tol = 1e-8,
                                    const std::optional<NcPolynomialD>& target = std::nullopt) {
  return extract_sohs(G, basis.words(), basis.nvars(), tol, target);
}

/// Feasibility SDP: one psd block of size s(d,n), C = 0, A_j = A_w, b_j = b_w.
inline sdp::SdpProblem to_sdp(const GramSystem& sys) {
  sdp::SdpProblem p;
  p.blocks = {static_cast<int>(sys.basis.size())};
  p.b.resize(static_cast<Eigen::Index>(sys.constraints.size()));
  for (std::size_t j = 0; j < sys.constraints.size(); ++j) {
    sdp::BlockMatrix a;
    for (const auto& e : sys.constraints[j].entries) a.add(0, e.row, e.col, to_double(e.value));
    a.normalize();
    p.A.push_back(std::move(a));
    p.b[static_cast<Eigen::Index>(j)] = to_double(sys.constraints[j].rhs);
  }
  return p;
}

namespace detail {

/// Symmetric Gaussian elimination; all pivots positive.
inline bool positive_definite(std::vector<std::vector<Rational>> A) {
  const std::size_t n = A.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (!(A[k][k] > 0)) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (is_zero(A[i][k])) continue;
      const Rational f = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
    }
  }
  return true;
}

}  // namespace detail

/// Face of the psd cone holding every psd solution of a Gram system:
/// G = P H P^T with H psd of size kept.size(). Row u of P is e_a when u is
/// kept at position a, a combination of kept positions when u is folded,
/// and zero otherwise.
struct GramFace {
  std::vector<std::size_t> kept;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows;  // one per basis word
  /// Some constraint reads 0 = b with b nonzero: no psd solution exists.
  bool infeasible = false;

  Eigen::MatrixXd lift() const {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t u = 0; u < rows.size(); ++u)
      for (const auto& [a, v] : rows[u]) P(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(a)) = to_double(v);
    return P;
  }
  /// P H P^T
  Eigen::MatrixXd expand(const Eigen::MatrixXd& H) const {
    const Eigen::MatrixXd P = lift();
    Eigen::MatrixXd G = P * H * P.transpose();
    return 0.5 * (G + G.transpose());
  }
};

/// Exact facial reduction of a Gram system. A constraint with rhs 0 whose
/// entries all lie on the diagonal forces those rows to vanish. Entries fixed
/// by single-entry constraints that cover the block of top-degree words give
/// a psd matrix whose kernel vectors q satisfy G q = 0; one row per kernel
/// vector is folded into the others.
inline GramFace gram_face(const GramSystem& sys) {
  const std::size_t s = sys.basis.size();
  std::vector<bool> alive(s, true);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : sys.constraints) {
      if (!is_zero(c.rhs)) continue;
      bool diagonal = true, any = false;
      for (const auto& e : c.entries) {
        if (!alive[static_cast<std::size_t>(e.row)] || !alive[static_cast<std::size_t>(e.col)]) continue;
        any = true;
        if (e.row != e.col || !(e.value > 0)) diagonal = false;
      }
      if (!any || !diagonal) continue;
      for (const auto& e : c.entries)
        if (e.row == e.col) alive[static_cast<std::size_t>(e.row)] = false;
      changed = true;
    }
  }

  // G(u, v) from constraints with a single live entry.
  std::map<std::pair<int, int>, Rational> fixed;
  for (const auto& c : sys.constraints) {
    const GramEntry* only = nullptr;
    int live = 0;
    for (const auto& e : c.entries)
      if (alive[static_cast<std::size_t>(e.row)] && alive[static_cast<std::size_t>(e.col)]) {
        ++live;
        only = &e;
      }
    if (live == 1) fixed[{only->row, only->col}] = c.rhs / (only->row == only->col ? only->value : Rational(2) * only->value);
  }
  std::vector<std::size_t> top;
  const int d = sys.basis.degree();
  for (std::size_t u = 0; u < s; ++u)
    if (alive[u] && d > 0 && sys.basis[u].degree() == d) top.push_back(u);
  std::set<std::size_t> folded;
  std::map<std::size_t, std::vector<std::pair<std::size_t, Rational>>> fold_to;  // basis row -> (basis row, coefficient)
  bool complete = !top.empty();
  std::vector<std::vector<Rational>> T(top.size(), std::vector<Rational>(top.size()));
  for (std::size_t i = 0; i < top.size() && complete; ++i)
    for (std::size_t j = i; j < top.size() && complete; ++j) {
      auto it = fixed.find({static_cast<int>(top[i]), static_cast<int>(top[j])});
      if (it == fixed.end()) complete = false;
      else T[i][j] = T[j][i] = it->second;
    }
  if (complete) {
    std::vector<LinearEquality> eqs;
    for (std::size_t i = 0; i < top.size(); ++i) {
      LinearForm row;
      for (std::size_t j = 0; j < top.size(); ++j)
        if (!is_zero(T[i][j])) row[static_cast<int>(j)] = T[i][j];
      if (!row.empty()) eqs.push_back({row, Rational(0)});
    }
    const AffineParametrization ker = eliminate(static_cast<int>(top.size()), eqs);
    std::set<std::size_t> free_set;
    for (int v : ker.free_vars) free_set.insert(static_cast<std::size_t>(v));
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < top.size(); ++i)
      if (!free_set.count(i)) rest.push_back(i);
    std::vector<std::vector<Rational>> TK(rest.size(), std::vector<Rational>(rest.size()));
    for (std::size_t a = 0; a < rest.size(); ++a)
      for (std::size_t b = 0; b < rest.size(); ++b) TK[a][b] = T[rest[a]][rest[b]];
    if (!free_set.empty() && detail::positive_definite(TK)) {
      for (std::size_t j = 0; j < ker.columns.size(); ++j) {
        const auto p = static_cast<std::size_t>(ker.free_vars[j]);
        auto& combo = fold_to[top[p]];
        for (const auto& [i, a] : ker.columns[j])
          if (static_cast<std::size_t>(i) != p) combo.push_back({top[static_cast<std::size_t>(i)], -a});
        folded.insert(top[p]);
      }
    }
  }

  GramFace face;
  face.rows.resize(s);
  std::vector<std::size_t> position(s, 0);
  for (std::size_t u = 0; u < s; ++u)
    if (alive[u] && !folded.count(u)) {
      position[u] = face.kept.size();
      face.rows[u].push_back({face.kept.size(), Rational(1)});
      face.kept.push_back(u);
    }
  for (const auto& [p, combo] : fold_to)
    for (const auto& [u, a] : combo) face.rows[p].push_back({position[u], a});
  return face;
}

/// <A, P H P^T> = <P^T A P, H> as entries over kept positions (row <= col).
inline std::map<std::pair<std::size_t, std::size_t>, Rational> restrict_constraint(const GramConstraint& c, const GramFace& face) {
  std::map<std::pair<std::size_t, std::size_t>, Rational> out;
  auto add = [&](std::size_t a, std::size_t b, const Rational& v) {
    if (a > b) std::swap(a, b);
    out[{a, b}] += v;
  };
  for (const auto& e : c.entries) {
    const auto& ru = face.rows[static_cast<std::size_t>(e.row)];
    const auto& rv = face.rows[static_cast<std::size_t>(e.col)];
    // Symmetric A: diagonal entries count once, off-diagonal ones twice.
    for (const auto& [a, x] : ru)
      for (const auto& [b, y] : rv) {
        const Rational v = e.value * x * y;
        if (e.row == e.col) add(a, b, a == b ? v : v / Rational(2));
        else add(a, b, a == b ? Rational(2) * v : v);
      }
  }
  std::erase_if(out, [](const auto& kv) { return is_zero(kv.second); });
  return out;
}

/// Feasibility SDP over the face: one psd block of size kept.size(), C = 0,
/// constraints that vanish on the face are left out.
inline sdp::SdpProblem to_sdp(const GramSystem& sys, GramFace& face) {
  sdp::SdpProblem p;
  p.blocks = {static_cast<int>(face.kept.size())};
  std::vector<double> b;
  for (const auto& c : sys.constraints) {
    const auto entries = restrict_constraint(c, face);
    if (entries.empty()) {
      if (!is_zero(c.rhs)) face.infeasible = true;
      continue;
    }
    sdp::BlockMatrix a;
    for (const auto& [rc, v] : entries) a.add(0, static_cast<int>(rc.first), static_cast<int>(rc.second), to_double(v));
    a.normalize();
    p.A.push_back(std::move(a));
    b.push_back(to_double(c.rhs));
  }
  p.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  return p;
}

}  // namespace ncpop

#endif  // NCPOP_GRAM_HPP
