#ifndef NCPOP_HIERARCHY_HPP
#define NCPOP_HIERARCHY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseQR>
#include <Eigen/OrderingMethods>

#include "ncpop/elimination.hpp"
#include "ncpop/evaluate.hpp"
#include "ncpop/gram.hpp"
#include "ncpop/moment.hpp"
#include "ncpop/polynomial.hpp"
#include "ncpop/sdp/solver.hpp"

namespace ncpop {

struct NcProblem {
  NcPolynomial objective{1};
  std::vector<NcPolynomial> inequalities;
  std::vector<NcPolynomial> equalities;
  Mode kind = Mode::Eigenvalue;
  std::optional<int> order;

  int nvars() const {
    int n = objective.nvars();
    for (const auto& g : inequalities) n = std::max(n, g.nvars());
    for (const auto& h : equalities) n = std::max(n, h.nvars());
    return n;
  }

  /// max(ceil(deg f / 2), max d_g, max d_h)
  int minimal_order() const {
    int d = objective.half_degree().value_or(0);
    for (const auto& g : inequalities) d = std::max(d, g.half_degree().value_or(0));
    for (const auto& h : equalities) d = std::max(d, h.half_degree().value_or(0));
    return d;
  }

  int resolved_order() const { return order.value_or(minimal_order()); }
};

/// A term mu * u* h v of the equality part of a certificate.
struct EqualityMultiplier {
  std::size_t equality = 0;  // index into NcProblem::equalities
  Word u;
  Word v;
  double coefficient = 0.0;
};

struct InequalityWeights {
  NcPolynomialD g{1};
  std::vector<NcPolynomialD> weights;  // p_j with the term sum_j p_j* g p_j
};

/// f - lambda = sum g_i* g_i + sum_k sum_j p_kj* g_k p_kj + sum mu u* h v,
/// up to `residual` (coefficientwise in eigenvalue mode, on cyclic class
/// sums in trace mode).
struct HierarchyCertificate {
  double lambda = 0.0;
  SohsCertificate sohs;
  std::vector<InequalityWeights> inequalities;
  std::vector<EqualityMultiplier> equalities;
  double residual_norm = 0.0;
};

struct BoundReport {
  Mode kind = Mode::Eigenvalue;
  int order = 0;
  /// SOHS side (the certified lower bound) and moment side.
  double primal_bound = 0.0;
  double dual_bound = 0.0;
  sdp::Status status = sdp::Status::NumericalTrouble;
  std::string primal_status;
  std::string dual_status;
  double gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  bool objective_symmetrized = false;
  int num_moment_classes = 0;
  int num_free_variables = 0;
  std::vector<int> block_sizes;
  std::optional<HierarchyCertificate> certificate;
  std::optional<Eigen::MatrixXd> moment_matrix;

  double bound() const { return primal_bound; }
  bool finite() const { return status == sdp::Status::Optimal; }
  /// Unbounded below (bound -inf) or infeasible constraints (bound +inf).
  bool classified_infeasible() const {
    return status == sdp::Status::PrimalInfeasible || status == sdp::Status::DualInfeasible;
  }
};

struct HierarchyOptions {
  sdp::SolverOptions solver;
  bool certificate = true;
  double clip_tol = 1e-8;
};

/// coefficient * L(u* h v)
struct IdealTerm {
  Word u;
  Word v;
  Rational coefficient;
};

/// An implied zero row form = sum of terms, all with the same equality h.
struct KernelRow {
  std::size_t equality = 0;
  LinearForm form;
  std::vector<IdealTerm> terms;
};

/// Assembled moment relaxation:
///   minimize L(f) over class variables y with E y = r,
///   M_d(y) psd and M_{d-d_g}(g y) psd for every inequality g.
/// Equalities are eliminated exactly (y = y0 + N z) before the pencil is formed.
struct MomentProgram {
  MomentLayout layout;
  Mode kind = Mode::Eigenvalue;
  int order = 0;
  NcPolynomial objective{1};
  bool objective_symmetrized = false;
  bool normalized = true;
  std::vector<LocalizingTemplate> blocks;  // blocks[0] is the moment matrix (g = 1)
  /// Rows of each template kept in the SDP block. Rows dropped from the
  /// moment matrix span a kernel forced by the equalities.
  std::vector<std::vector<std::size_t>> active;
  std::vector<NcPolynomial> equality_polys;
  std::vector<std::vector<EqualityRow>> equality_rows;  // per equality polynomial
  /// Rows taken out of the active set and re-expressed through it: the SDP
  /// block is P^T M P, where P is the identity on the active rows and maps a
  /// folded row to sum over (a, alpha) of alpha e_a, a a position in active.
  std::vector<std::map<std::size_t, std::vector<std::pair<std::size_t, Rational>>>> folded;
  /// Rows implied by kernel vectors of the psd blocks.
  std::vector<KernelRow> kernel_rows;
  std::vector<LinearEquality> fixed;                    // normalization and fixed entries
  LinearForm objective_form;
  AffineParametrization param;
  sdp::SdpProblem sdp;
  double offset = 0.0;
};

namespace detail {

/// Template rows (with coefficients) that make up each row of the SDP block k.
inline std::vector<std::vector<std::pair<std::size_t, Rational>>> block_rows(const MomentProgram& prog, std::size_t k) {
  const auto& act = prog.active[k];
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows(act.size());
  for (std::size_t a = 0; a < act.size(); ++a) rows[a].push_back({act[a], Rational(1)});
  if (k < prog.folded.size())
    for (const auto& [p, combo] : prog.folded[k])
      for (const auto& [a, alpha] : combo) rows[a].push_back({p, alpha});
  return rows;
}

inline LinearForm block_entry(const LocalizingTemplate& t, const std::vector<std::pair<std::size_t, Rational>>& ra,
                              const std::vector<std::pair<std::size_t, Rational>>& rb) {
  LinearForm e;
  for (const auto& [i, alpha] : ra)
    for (const auto& [j, beta] : rb)
      for (const auto& [c, v] : t.at(i, j)) e[c] += alpha * beta * v;
  std::erase_if(e, [](const auto& kv) { return is_zero(kv.second); });
  return e;
}

/// Dense P^T-expansion of an SDP block solution over the template words it
/// involves: the active rows followed by the folded ones.
inline std::pair<Eigen::MatrixXd, std::vector<Word>> expand_block(const MomentProgram& prog, std::size_t k,
                                                                  const Eigen::MatrixXd& X) {
  const auto& act = prog.active[k];
  const auto na = static_cast<Eigen::Index>(act.size());
  std::vector<Word> words;
  for (std::size_t i : act) words.push_back(prog.blocks[k].rows[i]);
  if (k >= prog.folded.size() || prog.folded[k].empty()) return {X, words};
  const auto nf = static_cast<Eigen::Index>(prog.folded[k].size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(na + nf, na);
  P.topRows(na).setIdentity();
  Eigen::Index r = na;
  for (const auto& [p, combo] : prog.folded[k]) {
    words.push_back(prog.blocks[k].rows[p]);
    for (const auto& [a, alpha] : combo) P(r, static_cast<Eigen::Index>(a)) = to_double(alpha);
    ++r;
  }
  Eigen::MatrixXd G = P * X * P.transpose();
  G = 0.5 * (G + G.transpose());
  return {G, words};
}

struct ProgramSpec {
  NcPolynomial objective{1};
  std::vector<NcPolynomial> inequalities;
  std::vector<NcPolynomial> equalities;
  Mode kind = Mode::Eigenvalue;
  int order = 0;
  int nvars = 1;
  bool normalized = true;
  std::vector<std::pair<Word, Rational>> fixed_moments;
};

/// Largest support of lambda >= 0 with sum_c lambda_c v_c = 0, where v_c are
/// the columns of V. Solved as the LP max sum lambda, lambda <= 1, whose
/// interior point solution lies in the relative interior of the optimal face.
inline std::vector<bool> max_support_combination(const Eigen::MatrixXd& V) {
  const auto m = V.cols();
  std::vector<bool> out(static_cast<std::size_t>(m), false);
  if (m == 0) return out;
  // Orthonormal basis of the row space of V keeps the LP constraints independent.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V.transpose());
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, rank);
  sdp::SdpProblem lp;
  lp.blocks = {-static_cast<int>(2 * m)};
  lp.b = Eigen::VectorXd::Zero(rank + m);
  for (Eigen::Index r = 0; r < rank; ++r) {
    sdp::BlockMatrix A;
    for (Eigen::Index c = 0; c < m; ++c)
      if (std::abs(Q(c, r)) > 1e-14) A.add(0, static_cast<int>(c), static_cast<int>(c), Q(c, r));
    A.normalize();
    lp.A.push_back(std::move(A));
  }
  for (Eigen::Index c = 0; c < m; ++c) {
    sdp::BlockMatrix A;
    A.add(0, static_cast<int>(c), static_cast<int>(c), 1.0);
    A.add(0, static_cast<int>(m + c), static_cast<int>(m + c), 1.0);
    lp.A.push_back(std::move(A));
    lp.b[rank + c] = 1.0;
    lp.C.add(0, static_cast<int>(c), static_cast<int>(c), 1.0);
  }
  lp.C.normalize();
  sdp::SolverOptions opt;
  opt.gap_tol = 1e-10;
  opt.feas_tol = 1e-10;
  const sdp::SdpSolution sol = sdp::solve(lp, opt);
  if (sol.X.empty() || sol.primal_value < 1e-3) return out;
  for (Eigen::Index c = 0; c < m; ++c) out[static_cast<std::size_t>(c)] = sol.X[0](c, c) > 1e-3;
  return out;
}

/// A positive semidefinite block M with q^T M q = 0 has M q = 0. The
/// candidates are q = a h b for an equality h and words a, b, in every
/// block. A candidate is accepted when its quadratic form vanishes on
/// the current affine set of moments, or when a nonnegative combination of
/// such forms does (each term is then zero). The implied rows M q = 0 are
/// added and the coordinates of an echelon basis of the accepted q are
/// dropped from the block. Without this the moment side has no interior
/// point and the SOHS side is not attained.
inline void reduce_blocks(MomentProgram& prog, std::vector<LinearEquality>& rows) {
  const int n = prog.layout.nvars();
  struct Candidate {
    std::size_t block;
    std::size_t eq;
    Word a;  // q = a h b
    Word b;
    std::map<std::size_t, Rational> q;
    bool accepted = false;
    bool rows_added = false;
  };
  std::vector<Candidate> cand;
  for (std::size_t k = 0; k < prog.blocks.size(); ++k) {
    const WordBasis& B = prog.blocks[k].rows;
    for (std::size_t e = 0; e < prog.equality_polys.size(); ++e) {
      const NcPolynomial& h = prog.equality_polys[e];
      const int room = B.degree() - *h.degree();
      if (room < 0) continue;
      const WordBasis sides(n, room);
      for (const auto& a : sides)
        for (const auto& b : sides) {
          if (a.degree() + b.degree() > room) continue;
          const NcPolynomial q = NcPolynomial(n, a) * h * NcPolynomial(n, b);
          Candidate c{k, e, a, b, {}};
          for (const auto& [w, x] : q.terms()) c.q[B.index(w)] = x;
          if (!c.q.empty()) cand.push_back(std::move(c));
        }
    }
  }
  auto quadratic = [&](const Candidate& c) {
    const auto& t = prog.blocks[c.block];
    LinearForm quad;
    for (const auto& [a, qa] : c.q)
      for (const auto& [b, qb] : c.q)
        for (const auto& [cls, coef] : t.at(a, b)) quad[cls] += qa * qb * coef;
    std::erase_if(quad, [](const auto& kv) { return is_zero(kv.second); });
    return quad;
  };
  std::set<LinearForm> seen;
  for (const auto& r : rows) seen.insert(r.lhs);
  // Rows u* g q = 0, written as sum of terms coefficient * L(a* h b) over words.
  auto add_rows = [&](const Candidate& c) {
    const auto& t = prog.blocks[c.block];
    bool added = false;
    for (std::size_t u = 0; u < t.size(); ++u) {
      LinearForm form;
      for (const auto& [b, qb] : c.q)
        for (const auto& [cls, coef] : t.at(u, b)) form[cls] += qb * coef;
      std::erase_if(form, [](const auto& kv) { return is_zero(kv.second); });
      if (form.empty()) continue;
      const Rational scale = Rational(1) / form.begin()->second;
      for (auto& [cls, a] : form) a *= scale;
      if (!seen.insert(form).second) continue;
      KernelRow row{c.eq, form, {}};
      // u* w a h b = (a* w* u)* h b
      for (const auto& [w, gw] : t.g.terms()) row.terms.push_back({c.a.star() * w.star() * t.rows[u], c.b, scale * gw});
      rows.push_back({row.form, Rational(0)});
      prog.kernel_rows.push_back(std::move(row));
      added = true;
    }
    return added;
  };

  for (int round = 0; round < 6; ++round) {
    std::vector<std::size_t> open;
    std::vector<std::pair<Rational, std::map<int, Rational>>> forms;
    bool exact = false;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (cand[i].accepted) continue;
      auto sub = prog.param.substitute(quadratic(cand[i]));
      if (is_zero(sub.first) && sub.second.empty()) {
        cand[i].accepted = true;
        exact = true;
        continue;
      }
      open.push_back(i);
      forms.push_back(std::move(sub));
    }
    if (!exact && !open.empty()) {
      // Affine coordinates (constant, z_1, ...) of every open quadratic form.
      std::map<int, Eigen::Index> coord;
      for (const auto& [c0, z] : forms)
        for (const auto& [j, a] : z) coord.try_emplace(j, 0);
      Eigen::Index next = 1;
      for (auto& [j, r] : coord) r = next++;
      Eigen::MatrixXd V = Eigen::MatrixXd::Zero(next, static_cast<Eigen::Index>(open.size()));
      for (std::size_t i = 0; i < open.size(); ++i) {
        V(0, static_cast<Eigen::Index>(i)) = to_double(forms[i].first);
        for (const auto& [j, a] : forms[i].second) V(coord[j], static_cast<Eigen::Index>(i)) = to_double(a);
      }
      const auto support = max_support_combination(V);
      for (std::size_t i = 0; i < open.size(); ++i)
        if (support[i]) {
          cand[open[i]].accepted = true;
          exact = true;
        }
    }
    if (!exact) break;
    bool added = false;
    for (auto& c : cand)
      if (c.accepted && !c.rows_added) {
        added = add_rows(c) || added;
        c.rows_added = true;
      }
    if (added) prog.param = eliminate(prog.layout.num_classes(), rows);
  }

  for (std::size_t k = 0; k < prog.blocks.size(); ++k) {
    std::vector<LinearEquality> kernel;
    for (const auto& c : cand) {
      if (c.block != k || !c.accepted) continue;
      LinearForm f;
      for (const auto& [i, a] : c.q) f[static_cast<int>(i)] = a;
      kernel.push_back({f, Rational(0)});
    }
    if (kernel.empty()) continue;
    const AffineParametrization ech = eliminate(static_cast<int>(prog.blocks[k].size()), kernel);
    std::vector<std::size_t> keep;
    for (int v : ech.free_vars) keep.push_back(static_cast<std::size_t>(v));
    prog.active[k] = std::move(keep);
  }
}

/// With the moment matrix as the only block, a class other than L(1) whose
/// active cells all lie on the diagonal and whose objective coefficient is 0
/// forces those diagonal Gram entries, hence their rows, to vanish in every
/// SOHS certificate. Such rows are dropped until none remain; otherwise the
/// SOHS side has no interior point.
inline void prune_zero_diagonals(MomentProgram& prog) {
  const auto& t = prog.blocks[0];
  auto& act = prog.active[0];
  for (;;) {
    std::map<int, std::vector<std::size_t>> diag;  // class -> rows with a positive diagonal cell
    std::set<int> blocked;                          // classes with an off-diagonal or nonpositive cell
    for (std::size_t a = 0; a < act.size(); ++a)
      for (std::size_t b = 0; b < act.size(); ++b)
        for (const auto& [c, v] : t.at(act[a], act[b])) {
          if (a == b && v > 0) diag[c].push_back(act[a]);
          else blocked.insert(c);
        }
    std::set<std::size_t> drop;
    for (const auto& [c, rows] : diag) {
      if (c == 0 || blocked.count(c)) continue;
      auto it = prog.objective_form.find(c);
      if (it != prog.objective_form.end() && !is_zero(it->second)) continue;
      drop.insert(rows.begin(), rows.end());
    }
    if (drop.empty()) return;
    std::erase_if(act, [&](std::size_t i) { return drop.count(i) > 0; });
  }
}

/// In eigenvalue mode a word of degree 2d splits as u* v with |u| = |v| = d
/// in one way only, so the Gram entries between words of degree d are fixed:
/// G(u, v) = f_{u* v}. When that block is psd and singular, every kernel
/// vector q gives G q = 0 for all certificates, and one row per kernel vector
/// is folded into the remaining ones.
inline void fold_top_degree(MomentProgram& prog) {
  const auto& t = prog.blocks[0];
  auto& act = prog.active[0];
  std::vector<std::size_t> top;
  for (std::size_t i : act)
    if (t.rows[i].degree() == prog.order) top.push_back(i);
  const std::size_t s = top.size();
  if (s == 0 || prog.order == 0) return;
  std::vector<std::vector<Rational>> G(s, std::vector<Rational>(s));
  std::vector<LinearEquality> eqs;
  for (std::size_t i = 0; i < s; ++i) {
    LinearForm row;
    for (std::size_t j = 0; j < s; ++j) {
      G[i][j] = prog.objective.coefficient(t.rows[top[i]].star() * t.rows[top[j]]);
      if (!is_zero(G[i][j])) row[static_cast<int>(j)] = G[i][j];
    }
    if (!row.empty()) eqs.push_back({row, Rational(0)});
  }
  const AffineParametrization ker = eliminate(static_cast<int>(s), eqs);
  if (ker.num_free() == 0) return;
  std::set<std::size_t> dropped;
  for (int v : ker.free_vars) dropped.insert(static_cast<std::size_t>(v));
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < s; ++i)
    if (!dropped.count(i)) kept.push_back(i);
  std::vector<std::vector<Rational>> GK(kept.size(), std::vector<Rational>(kept.size()));
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t b = 0; b < kept.size(); ++b) GK[a][b] = G[kept[a]][kept[b]];
  // An indefinite block leaves no certificate at all; the solver reports it.
  if (!positive_definite(GK)) return;

  std::set<std::size_t> gone;
  for (std::size_t i : dropped) gone.insert(top[i]);
  std::erase_if(act, [&](std::size_t i) { return gone.count(i) > 0; });
  std::map<std::size_t, std::size_t> position;
  for (std::size_t a = 0; a < act.size(); ++a) position[act[a]] = a;
  for (std::size_t j = 0; j < ker.columns.size(); ++j) {
    const auto p = static_cast<std::size_t>(ker.free_vars[j]);
    std::vector<std::pair<std::size_t, Rational>> combo;
    for (const auto& [i, a] : ker.columns[j])
      if (static_cast<std::size_t>(i) != p) combo.push_back({position.at(top[static_cast<std::size_t>(i)]), -a});
    prog.folded[0][top[p]] = std::move(combo);
  }
}

/// Classes that no longer occur in the block and not in the objective are
/// set to 0 so the constraints of the SDP stay independent. Only valid when
/// nothing else constrains the moments.
inline void pin_unused_classes(MomentProgram& prog, std::vector<LinearEquality>& rows) {
  const auto br = block_rows(prog, 0);
  std::set<int> used;
  for (std::size_t a = 0; a < br.size(); ++a)
    for (std::size_t b = a; b < br.size(); ++b)
      for (const auto& [c, v] : block_entry(prog.blocks[0], br[a], br[b])) used.insert(c);
  bool added = false;
  for (int c = 0; c < prog.layout.num_classes(); ++c) {
    auto it = prog.objective_form.find(c);
    if (used.count(c) || (it != prog.objective_form.end() && !is_zero(it->second))) continue;
    rows.push_back({LinearForm{{c, Rational(1)}}, Rational(0)});
    added = true;
  }
  if (added) prog.param = eliminate(prog.layout.num_classes(), rows);
}

inline MomentProgram assemble(const ProgramSpec& spec) {
  if (spec.order < 0) throw std::invalid_argument("relaxation order must be nonnegative");
  MomentProgram prog{MomentLayout(spec.nvars, spec.order, spec.kind), spec.kind, spec.order};
  const auto& layout = prog.layout;
  const int d = spec.order;
  if (spec.objective.degree() && *spec.objective.degree() > 2 * d)
    throw std::domain_error("objective degree " + std::to_string(*spec.objective.degree()) +
                            " exceeds twice the relaxation order " + std::to_string(d));
  prog.objective = spec.objective;
  if (!prog.objective.is_symmetric()) {
    prog.objective = prog.objective.symmetrized();
    prog.objective_symmetrized = true;
  }
  prog.normalized = spec.normalized;
  prog.objective_form = layout.linear_form(prog.objective);

  prog.blocks.push_back(build_localizing(layout, NcPolynomial(spec.nvars, Rational(1))));
  for (const auto& g : spec.inequalities) {
    if (g.is_zero()) throw std::invalid_argument("inequality constraint is the zero polynomial");
    if (!g.is_symmetric()) throw std::invalid_argument("inequality constraint " + std::to_string(prog.blocks.size()) + " is not symmetric");
    prog.blocks.push_back(build_localizing(layout, g));
  }

  std::vector<LinearEquality> rows;
  if (spec.normalized) prog.fixed.push_back({LinearForm{{0, Rational(1)}}, Rational(1)});
  for (const auto& [w, value] : spec.fixed_moments) prog.fixed.push_back({LinearForm{{layout.class_of(w), Rational(1)}}, value});
  rows = prog.fixed;
  for (const auto& h : spec.equalities) {
    if (h.is_zero()) continue;
    prog.equality_polys.push_back(h);
    prog.equality_rows.push_back(equality_rows_with_sources(layout, h));
    for (const auto& r : prog.equality_rows.back()) rows.push_back({r.form, Rational(0)});
  }
  prog.param = eliminate(layout.num_classes(), rows);
  for (const auto& t : prog.blocks) {
    std::vector<std::size_t> all(t.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    prog.active.push_back(std::move(all));
  }
  prog.folded.resize(prog.blocks.size());
  if (!prog.equality_polys.empty()) reduce_blocks(prog, rows);
  else if (spec.inequalities.empty() && spec.fixed_moments.empty() && spec.normalized) {
    prune_zero_diagonals(prog);
    if (spec.kind == Mode::Eigenvalue) fold_top_degree(prog);
    pin_unused_classes(prog, rows);
  }

  // Pencil sum_c y_c F_c with F_c gathered from every block.
  const int nc = layout.num_classes();
  std::vector<sdp::BlockMatrix> F(static_cast<std::size_t>(nc));
  auto& P = prog.sdp;
  for (std::size_t k = 0; k < prog.blocks.size(); ++k) {
    const auto& t = prog.blocks[k];
    const auto br = block_rows(prog, k);
    P.blocks.push_back(static_cast<int>(br.size()));
    for (std::size_t a = 0; a < br.size(); ++a)
      for (std::size_t b = a; b < br.size(); ++b)
        for (const auto& [c, v] : block_entry(t, br[a], br[b]))
          F[static_cast<std::size_t>(c)].add(static_cast<int>(k), static_cast<int>(a), static_cast<int>(b), to_double(v));
  }
  for (auto& f : F) f.normalize();

  // C = -F(y0); A_j = sum_c N_cj F_c; b_j = sum_c fbar_c N_cj.
  const auto& param = prog.param;
  sdp::BlockMatrix C;
  Rational offset(0);
  for (int c = 0; c < nc; ++c) {
    const Rational& y0 = param.offset[static_cast<std::size_t>(c)];
    if (is_zero(y0)) continue;
    for (const auto& e : F[static_cast<std::size_t>(c)].entries()) C.add(e.block, e.row, e.col, -to_double(y0) * e.value);
    auto it = prog.objective_form.find(c);
    if (it != prog.objective_form.end()) offset += it->second * y0;
  }
  C.normalize();
  P.C = std::move(C);
  const int m = param.num_free();
  P.b.resize(m);
  for (int j = 0; j < m; ++j) {
    Rational bj(0);
    for (const auto& [c, a] : param.columns[static_cast<std::size_t>(j)]) {
      auto it = prog.objective_form.find(c);
      if (it != prog.objective_form.end()) bj += it->second * a;
    }
    P.b[j] = to_double(bj);
  }
  sdp::FactoredConstraints fc;
  fc.basis = std::move(F);
  fc.lift = param.lift();
  P.factored = std::move(fc);
  prog.offset = to_double(offset);
  return prog;
}

inline ProgramSpec spec_from(const NcProblem& p) {
  ProgramSpec s;
  s.objective = p.objective;
  s.inequalities = p.inequalities;
  s.equalities = p.equalities;
  s.kind = p.kind;
  s.order = p.resolved_order();
  s.nvars = p.nvars();
  const int minimal = p.minimal_order();
  if (s.order < minimal)
    throw std::domain_error("relaxation order " + std::to_string(s.order) + " is below the minimal order " +
                            std::to_string(minimal));
  return s;
}

}  // namespace detail

/// Moment relaxation of an eigenvalue or trace problem (normalized, L(1) = 1).
inline MomentProgram build_program(const NcProblem& p) { return detail::assemble(detail::spec_from(p)); }

namespace detail {

inline std::string side_status(sdp::Status s, bool sohs_side) {
  using sdp::Status;
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::PrimalInfeasible: return sohs_side ? "infeasible" : "unbounded";
    case Status::DualInfeasible: return sohs_side ? "unbounded" : "infeasible";
    case Status::NumericalTrouble: return "numerical_trouble";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

/// Class sums of p under the layout's identification (L(p) coefficient vector).
inline Eigen::VectorXd class_sums(const MomentLayout& layout, const NcPolynomialD& p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.num_classes());
  for (const auto& [w, c] : p.terms()) v[layout.class_of(w)] += c;
  return v;
}

inline NcPolynomialD equality_term(const NcPolynomial& h, const Word& u, const Word& v) {
  const int n = h.nvars();
  return NcPolynomialD(n, u.star()) * h.to_double() * NcPolynomialD(n, v);
}

/// f - lambda - (sum of the weighted squares) - (equality part), measured
/// coefficientwise after symmetrization (eigenvalue) or on class sums (trace).
inline double certificate_residual(const MomentProgram& prog, const HierarchyCertificate& cert) {
  const int n = prog.layout.nvars();
  NcPolynomialD r = prog.objective.to_double() - NcPolynomialD(n, cert.lambda);
  r -= sum_of_hermitian_squares(cert.sohs.summands, n);
  for (const auto& iw : cert.inequalities)
    for (const auto& p : iw.weights) r -= p.star() * iw.g * p;
  for (const auto& e : cert.equalities)
    r -= e.coefficient * equality_term(prog.equality_polys[e.equality], e.u, e.v);
  if (prog.kind == Mode::Eigenvalue) return max_abs_coefficient(r.symmetrized());
  const Eigen::VectorXd s = class_sums(prog.layout, r);
  return s.size() ? s.cwiseAbs().maxCoeff() : 0.0;
}

inline HierarchyCertificate extract_certificate(const MomentProgram& prog, const sdp::SdpSolution& sol, double lambda,
                                                double clip_tol) {
  const auto& layout = prog.layout;
  const int n = layout.nvars();
  HierarchyCertificate cert;
  cert.lambda = lambda;
  {
    const auto [G, words] = expand_block(prog, 0, sol.X[0]);
    cert.sohs = extract_sohs(G, words, n, clip_tol);
  }
  NcPolynomialD covered = sum_of_hermitian_squares(cert.sohs.summands, n);
  for (std::size_t k = 1; k < prog.blocks.size(); ++k) {
    const auto& t = prog.blocks[k];
    InequalityWeights iw;
    iw.g = t.g.to_double();
    const auto [G, words] = expand_block(prog, k, sol.X[k]);
    SohsCertificate part = extract_sohs(G, words, n, clip_tol);
    iw.weights = std::move(part.summands);
    for (const auto& p : iw.weights) covered += p.star() * iw.g * p;
    cert.inequalities.push_back(std::move(iw));
  }
  // The remainder lies in the span of the equality rows up to solver error;
  // recover the multipliers by sparse least squares on class sums.
  const NcPolynomialD remainder = prog.objective.to_double() - NcPolynomialD(n, lambda) - covered;
  const Eigen::VectorXd target = class_sums(layout, remainder);
  std::vector<std::pair<std::size_t, std::size_t>> cols;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < prog.equality_rows.size(); ++e)
    for (std::size_t r = 0; r < prog.equality_rows[e].size(); ++r) {
      const auto& row = prog.equality_rows[e][r];
      const int col = static_cast<int>(cols.size());
      const double s = to_double(row.scale);
      for (const auto& [c, a] : row.form) trip.emplace_back(c, col, to_double(a) / s);
      cols.emplace_back(e, r);
    }
  const std::size_t plain = cols.size();
  for (std::size_t r = 0; r < prog.kernel_rows.size(); ++r) {
    const int col = static_cast<int>(cols.size());
    for (const auto& [c, a] : prog.kernel_rows[r].form) trip.emplace_back(c, col, to_double(a));
    cols.emplace_back(prog.kernel_rows[r].equality, r);
  }
  if (!cols.empty()) {
    Eigen::SparseMatrix<double> E(layout.num_classes(), static_cast<int>(cols.size()));
    E.setFromTriplets(trip.begin(), trip.end());
    E.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.compute(E);
    if (qr.info() == Eigen::Success) {
      const Eigen::VectorXd mu = qr.solve(target);
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const double m = mu[static_cast<Eigen::Index>(j)];
        if (m == 0.0) continue;
        if (j < plain) {
          const auto& row = prog.equality_rows[cols[j].first][cols[j].second];
          cert.equalities.push_back({cols[j].first, row.u, row.v, m});
        } else {
          for (const auto& term : prog.kernel_rows[cols[j].second].terms)
            cert.equalities.push_back({cols[j].first, term.u, term.v, m * to_double(term.coefficient)});
        }
      }
    }
  }
  cert.residual_norm = certificate_residual(prog, cert);
  return cert;
}

}  // namespace detail

/// Solves an assembled program. The moment side is the SDP dual (in z),
/// the SOHS side is the SDP primal; both bounds include the constant offset.
inline BoundReport solve_program(const MomentProgram& prog, const HierarchyOptions& opt = {}) {
  BoundReport rep;
  rep.kind = prog.kind;
  rep.order = prog.order;
  rep.objective_symmetrized = prog.objective_symmetrized;
  rep.num_moment_classes = prog.layout.num_classes();
  rep.num_free_variables = prog.param.num_free();
  rep.block_sizes = prog.sdp.blocks;
  const sdp::SdpSolution sol = sdp::solve(prog.sdp, opt.solver);
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.primal_infeasibility = sol.primal_infeasibility;
  rep.dual_infeasibility = sol.dual_infeasibility;
  rep.primal_status = detail::side_status(sol.status, true);
  rep.dual_status = detail::side_status(sol.status, false);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (sol.status == sdp::Status::PrimalInfeasible) {
    rep.primal_bound = rep.dual_bound = -inf;
    rep.gap = 0.0;
    return rep;
  }
  if (sol.status == sdp::Status::DualInfeasible) {
    rep.primal_bound = rep.dual_bound = inf;
    rep.gap = 0.0;
    return rep;
  }
  rep.primal_bound = sol.primal_value + prog.offset;
  rep.dual_bound = sol.dual_value + prog.offset;
  rep.gap = std::abs(rep.primal_bound - rep.dual_bound);
  const Eigen::VectorXd y = prog.param.expand(sol.y);
  rep.moment_matrix = prog.layout.moment_matrix(y);
  if (opt.certificate && sol.status == sdp::Status::Optimal && prog.normalized)
    rep.certificate = detail::extract_certificate(prog, sol, rep.primal_bound, opt.clip_tol);
  return rep;
}

/// Recomputes the certificate residual from its components.
inline double replay_certificate(const MomentProgram& prog, const HierarchyCertificate& cert) {
  return detail::certificate_residual(prog, cert);
}

inline BoundReport eig_min_constrained(const NcProblem& p, const HierarchyOptions& opt = {}) {
  if (p.kind != Mode::Eigenvalue) throw std::invalid_argument("eig_min_constrained: problem kind must be eigenvalue");
  return solve_program(build_program(p), opt);
}

inline BoundReport trace_min_constrained(const NcProblem& p, const HierarchyOptions& opt = {}) {
  if (p.kind != Mode::Trace) throw std::invalid_argument("trace_min_constrained: problem kind must be trace");
  return solve_program(build_program(p), opt);
}

inline NcProblem unconstrained_problem(const NcPolynomial& f, std::optional<int> d, Mode kind) {
  NcProblem p;
  p.objective = f;
  p.kind = kind;
  p.order = d;
  return p;
}

inline BoundReport eig_min_unconstrained(const NcPolynomial& f, std::optional<int> d = std::nullopt,
                                         const HierarchyOptions& opt = {}) {
  return eig_min_constrained(unconstrained_problem(f, d, Mode::Eigenvalue), opt);
}

inline BoundReport trace_min_unconstrained(const NcPolynomial& f, std::optional<int> d = std::nullopt,
                                           const HierarchyOptions& opt = {}) {
  return trace_min_constrained(unconstrained_problem(f, d, Mode::Trace), opt);
}

/// Program for the psd-rank lower bound of a nonnegative p x q matrix:
/// minimize L(1) over tracial L with L(x_i x_{p+j}) = M_ij, localizing
/// constraints x_i - x_i^2 and (sum_i M_ij) x_{p+j} - x_{p+j}^2, and the
/// zero-localizing equality 1 - sum_{i<=p} x_i.
inline MomentProgram build_psd_rank_program(const Eigen::MatrixXd& M, int d) {
  if (d < 1) throw std::invalid_argument("psd_rank_lower_bound: order must be at least 1");
  if (M.size() == 0) throw std::invalid_argument("psd_rank_lower_bound: empty matrix");
  if (!M.allFinite() || M.minCoeff() < 0.0) throw std::invalid_argument("psd_rank_lower_bound: matrix must be entrywise nonnegative");
  const int p = static_cast<int>(M.rows());
  const int q = static_cast<int>(M.cols());
  const int n = p + q;
  detail::ProgramSpec s;
  s.kind = Mode::Trace;
  s.order = d;
  s.nvars = n;
  s.normalized = false;
  s.objective = NcPolynomial(n, Rational(1));
  for (int i = 1; i <= p; ++i) {
    const NcPolynomial x = NcPolynomial::variable(n, i);
    s.inequalities.push_back(x - x * x);
  }
  for (int j = 1; j <= q; ++j) {
    Rational colsum(0);
    for (int i = 0; i < p; ++i) colsum += exact_rational(M(i, j - 1));
    const NcPolynomial x = NcPolynomial::variable(n, p + j);
    s.inequalities.push_back(colsum * x - x * x);
  }
  NcPolynomial h(n, Rational(1));
  for (int i = 1; i <= p; ++i) h -= NcPolynomial::variable(n, i);
  s.equalities.push_back(h);
  for (int i = 1; i <= p; ++i)
    for (int j = 1; j <= q; ++j) s.fixed_moments.emplace_back(Word({i, p + j}), exact_rational(M(i - 1, j - 1)));
  return detail::assemble(s);
}

inline BoundReport psd_rank_lower_bound(const Eigen::MatrixXd& M, int d, const HierarchyOptions& opt = {}) {
  return solve_program(build_psd_rank_program(M, d), opt);
}

// ---------------------------------------------------------------------------
// Sampling upper bounds

using MatrixTuple = std::vector<Eigen::MatrixXd>;
/// Draws a tuple of `nvars` symmetric matrices of size `size`.
using Sampler = std::function<MatrixTuple(int nvars, int size, std::mt19937_64& rng)>;

/// Q diag(lambda) Q^T with Haar-distributed Q and eigenvalues uniform in
/// [-radius, radius].
inline Sampler spectral_sampler(double radius = 1.5) {
  return [radius](int nvars, int size, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(-radius, radius);
    MatrixTuple out;
    for (int k = 0; k < nvars; ++k) {
      Eigen::MatrixXd R(size, size);
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) R(i, j) = g(rng);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
      Eigen::MatrixXd Q = qr.householderQ();
      Eigen::VectorXd lam(size);
      for (int i = 0; i < size; ++i) lam[i] = u(rng);
      out.push_back(Q * lam.asDiagonal() * Q.transpose());
    }
    return out;
  };
}

/// Random reflections U_i (x) I and I (x) V_j on C^size (x) C^size: they
/// satisfy x_i^2 = 1 and [x_i, y_j] = 0. The first `alice` letters act on
/// the left factor.
inline Sampler commuting_reflection_sampler(int alice) {
  return [alice](int nvars, int size, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    auto reflection = [&]() {
      Eigen::MatrixXd R(size, size);
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) R(i, j) = g(rng);
      Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(R).householderQ();
      std::uniform_int_distribution<int> rank(0, size);
      const int r = rank(rng);
      Eigen::VectorXd s = Eigen::VectorXd::Ones(size);
      for (int i = 0; i < r; ++i) s[i] = -1.0;
      return Eigen::MatrixXd(Q * s.asDiagonal() * Q.transpose());
    };
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(size, size);
    MatrixTuple out;
    for (int k = 0; k < nvars; ++k) {
      const Eigen::MatrixXd U = reflection();
      Eigen::MatrixXd K(size * size, size * size);
      const Eigen::MatrixXd& A = k < alice ? U : I;
      const Eigen::MatrixXd& B = k < alice ? I : U;
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) K.block(i * size, j * size, size, size) = A(i, j) * B;
      out.push_back(K);
    }
    return out;
  };
}

struct SampleResult {
  std::optional<double> value;  // empty when no sample satisfied the constraints
  int feasible = 0;
  int trials = 0;
};

/// Minimum of lambda_min(f(A)) (eigenvalue kind) or tr(f(A)) (trace kind)
/// over sampled tuples A that satisfy the constraints (g(A) psd, h(A) = 0
/// within `feas_tol`). Deterministic for a given seed.
inline SampleResult sample_upper_bound(const NcProblem& prob, const std::vector<int>& sizes, int trials,
                                       std::uint64_t seed, const Sampler& sampler = spectral_sampler(),
                                       double feas_tol = 1e-8) {
  if (trials < 1) throw std::invalid_argument("sample_upper_bound: trials must be positive");
  if (sizes.empty()) throw std::invalid_argument("sample_upper_bound: no sizes given");
  std::mt19937_64 rng(seed);
  const int n = prob.nvars();
  const NcPolynomialD f = prob.objective.symmetrized().to_double();
  std::vector<NcPolynomialD> gs, hs;
  for (const auto& g : prob.inequalities) gs.push_back(g.to_double());
  for (const auto& h : prob.equalities) hs.push_back(h.to_double());
  SampleResult res;
  res.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const int size = sizes[static_cast<std::size_t>(t) % sizes.size()];
    const MatrixTuple A = sampler(n, size, rng);
    bool ok = true;
    for (const auto& g : gs) {
      const Eigen::MatrixXd G = evaluate(g, A);
      if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -feas_tol) {
        ok = false;
        break;
      }
    }
    for (std::size_t k = 0; ok && k < hs.size(); ++k)
      if (evaluate(hs[k], A).cwiseAbs().maxCoeff() > feas_tol) ok = false;
    if (!ok) continue;
    ++res.feasible;
    const Eigen::MatrixXd F = evaluate(f, A);
    const double v = prob.kind == Mode::Eigenvalue
                         ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(F, Eigen::EigenvaluesOnly).eigenvalues().minCoeff()
                         : normalized_trace(F);
    res.value = res.value ? std::min(*res.value, v) : v;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Presets

/// Bell operator setting: letters x1, x2, y1, y2 are 1..4. The objective is
/// -(g + g*)/2 for g = x1 y1 + x1 y2 + x2 y1 - x2 y2 with x_i^2 = y_j^2 = 1 and
/// [x_i, y_j] = 0; its minimum is -2 sqrt 2.
inline NcProblem chsh_problem(int order = 2) {
  const int n = 4;
  auto x = [&](int i) { return NcPolynomial::variable(n, i); };
  const NcPolynomial x1 = x(1), x2 = x(2), y1 = x(3), y2 = x(4);
  const NcPolynomial g = x1 * y1 + x1 * y2 + x2 * y1 - x2 * y2;
  NcProblem p;
  p.objective = -(g + g.star()) * Rational(1, 2);
  p.kind = Mode::Eigenvalue;
  p.order = order;
  const NcPolynomial one(n, Rational(1));
  for (const auto* a : {&x1, &x2, &y1, &y2}) p.equalities.push_back(*a * *a - one);
  for (const auto* a : {&x1, &x2})
    for (const auto* b : {&y1, &y2}) p.equalities.push_back(*a * *b - *b * *a);
  return p;
}

/// 3x3 nonnegative matrix with psd rank 3 used as the psd-rank example.
inline Eigen::MatrixXd psd_rank_example_matrix() {
  Eigen::MatrixXd M(3, 3);
  M << 1, 1.75, 0, 0, 1, 1.75, 1.75, 0, 1;
  return M;
}

}  // namespace ncpop

#endif  // NCPOP_HIERARCHY_HPP
