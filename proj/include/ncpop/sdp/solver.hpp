#ifndef NCPOP_SDP_SOLVER_HPP
#define NCPOP_SDP_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include "ncpop/sdp/problem.hpp"

namespace ncpop::sdp {

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, NumericalTrouble, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::PrimalInfeasible: return "primal_infeasible";
    case Status::DualInfeasible: return "dual_infeasible";
    case Status::NumericalTrouble: return "numerical_trouble";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  /// Normalized residual of an improving ray below which a side is
  /// declared infeasible.
  double infeas_tol = 1e-8;
  /// An objective beyond this magnitude on a feasible side counts as divergence.
  double divergence = 1e10;
  /// When the iteration stops early, the best iterate still counts as
  /// optimal if its residuals and relative gap are below this.
  double near_tol = 1e-6;
  bool verbose = false;
};

struct IterationRecord {
  int iteration = 0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double mu = 0.0;
};

struct SdpSolution {
  Status status = Status::NumericalTrouble;
  std::vector<Eigen::MatrixXd> X;  // one dense matrix per block (diagonal blocks as diagonal matrices)
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> Z;
  double primal_value = 0.0;  // <C, X>
  double dual_value = 0.0;    // b^T y
  double gap = 0.0;           // |primal - dual|
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> history;
  /// Why the solver stopped when it did not reach Optimal.
  std::string message;
};

namespace detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LocalEntry {
  int row;
  int col;
  double value;
};

/// Entries of one constraint-basis matrix restricted to one internal block.
struct BlockSlice {
  int basis;
  std::vector<LocalEntry> entries;
  bool diagonal_only() const {
    return std::all_of(entries.begin(), entries.end(), [](const LocalEntry& e) { return e.row == e.col; });
  }
};

struct InternalBlock {
  int dim = 0;
  std::vector<BlockSlice> slices;  // sorted by basis index
  std::vector<LocalEntry> c_entries;
};

/// Problem data rearranged per internal block. Diagonal blocks are split
/// into 1x1 blocks so that every internal block is a psd cone.
class Layout {
 public:
  explicit Layout(const SdpProblem& p) {
    for (std::size_t k = 0; k < p.blocks.size(); ++k) {
      const int s = p.blocks[k];
      first_internal_.push_back(static_cast<int>(blocks_.size()));
      if (s > 0) {
        blocks_.push_back(InternalBlock{s, {}, {}});
      } else {
        for (int i = 0; i < -s; ++i) blocks_.push_back(InternalBlock{1, {}, {}});
      }
    }
    const std::vector<BlockMatrix>* basis = nullptr;
    if (p.factored && !p.has_explicit_constraints()) {
      basis = &p.factored->basis;
      lift_ = p.factored->lift;
      factored_ = true;
    } else if (p.factored) {
      basis = &p.A;
    } else {
      basis = &p.A;
    }
    num_basis_ = static_cast<int>(basis->size());
    for (int t = 0; t < num_basis_; ++t) {
      for (const auto& e : (*basis)[static_cast<std::size_t>(t)].entries()) {
        auto [ib, r, c] = locate(p, e);
        auto& slices = blocks_[static_cast<std::size_t>(ib)].slices;
        if (slices.empty() || slices.back().basis != t) slices.push_back(BlockSlice{t, {}});
        slices.back().entries.push_back({r, c, e.value});
      }
    }
    for (const auto& e : p.C.entries()) {
      auto [ib, r, c] = locate(p, e);
      blocks_[static_cast<std::size_t>(ib)].c_entries.push_back({r, c, e.value});
    }
    num_constraints_ = p.num_constraints();
    total_dim_ = 0;
    for (const auto& b : blocks_) total_dim_ += b.dim;
  }

  const std::vector<InternalBlock>& blocks() const { return blocks_; }
  int num_basis() const { return num_basis_; }
  int num_constraints() const { return num_constraints_; }
  int total_dim() const { return total_dim_; }
  bool factored() const { return factored_; }
  const Eigen::SparseMatrix<double>& lift() const { return lift_; }
  int first_internal(int k) const { return first_internal_[static_cast<std::size_t>(k)]; }

  /// Basis coefficients -> constraint space (N^T v).
  VectorXd to_constraints(const VectorXd& v) const {
    if (!factored_) return v;
    return lift_.transpose() * v;
  }
  /// Constraint space -> basis coefficients (N y).
  VectorXd to_basis(const VectorXd& y) const {
    if (!factored_) return y;
    return lift_ * y;
  }

 private:
  std::tuple<int, int, int> locate(const SdpProblem& p, const Entry& e) const {
    const int first = first_internal_[static_cast<std::size_t>(e.block)];
    if (p.blocks[static_cast<std::size_t>(e.block)] > 0) return {first, e.row, e.col};
    return {first + e.row, 0, 0};
  }

  std::vector<InternalBlock> blocks_;
  std::vector<int> first_internal_;
  Eigen::SparseMatrix<double> lift_;
  bool factored_ = false;
  int num_basis_ = 0;
  int num_constraints_ = 0;
  int total_dim_ = 0;
};

inline double inner_sym(const std::vector<LocalEntry>& entries, const MatrixXd& m) {
  double s = 0.0;
  for (const auto& e : entries) s += e.row == e.col ? e.value * m(e.row, e.col) : e.value * (m(e.row, e.col) + m(e.col, e.row));
  return s;
}

inline void accumulate_sym(const std::vector<LocalEntry>& entries, double scale, MatrixXd& m) {
  for (const auto& e : entries) {
    m(e.row, e.col) += scale * e.value;
    if (e.row != e.col) m(e.col, e.row) += scale * e.value;
  }
}

using BlockVec = std::vector<MatrixXd>;

inline double inner(const BlockVec& a, const BlockVec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

inline double max_abs(const BlockVec& a) {
  double m = 0.0;
  for (const auto& x : a)
    if (x.size()) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

inline double frob(const BlockVec& a) {
  double s = 0.0;
  for (const auto& x : a) s += x.squaredNorm();
  return std::sqrt(s);
}

/// Nesterov-Todd scaling of one block: W = G G^T with G^T Z G = G^{-1} X G^{-T} = diag(d).
struct Scaling {
  MatrixXd G;
  MatrixXd Ginv;
  MatrixXd W;
  VectorXd d;
  MatrixXd LXinv;  // X = LX LX^T
  MatrixXd LZinv;
};

/// A = L L^T. Cholesky first; an eigendecomposition factor when Cholesky
/// breaks down on a nearly singular iterate.
inline bool psd_factor(const MatrixXd& A, MatrixXd& L, MatrixXd& Linv) {
  const auto n = A.rows();
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
    L = llt.matrixL();
    Linv = llt.matrixL().solve(MatrixXd::Identity(n, n));
    if (L.allFinite() && Linv.allFinite()) return true;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) return false;
  const VectorXd r = es.eigenvalues().cwiseSqrt();
  L = es.eigenvectors() * r.asDiagonal();
  Linv = r.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return L.allFinite() && Linv.allFinite();
}

inline bool nt_scaling(const MatrixXd& X, const MatrixXd& Z, Scaling& s) {
  MatrixXd LX, LXinv, LZ, LZinv;
  if (!psd_factor(X, LX, LXinv) || !psd_factor(Z, LZ, LZinv)) return false;
  MatrixXd prod = LZ.transpose() * LX;
  Eigen::JacobiSVD<MatrixXd> svd(prod, Eigen::ComputeFullU | Eigen::ComputeFullV);
  VectorXd sv = svd.singularValues();
  if (sv.minCoeff() <= 0.0 || !sv.allFinite()) return false;
  const MatrixXd& V = svd.matrixV();
  s.G = LX * V * sv.cwiseSqrt().cwiseInverse().asDiagonal();
  // G^{-1} = S^{1/2} V^T L_X^{-1}
  s.Ginv = sv.cwiseSqrt().asDiagonal() * V.transpose() * LXinv;
  s.W = s.G * s.G.transpose();
  s.W = 0.5 * (s.W + s.W.transpose());
  s.d = sv;
  s.LXinv = std::move(LXinv);
  s.LZinv = std::move(LZinv);
  return true;
}

/// Largest step keeping S + alpha * dS psd, given S = L L^T and L^{-1}.
inline double max_step(const MatrixXd& Linv, const MatrixXd& dir) {
  MatrixXd P = Linv * dir * Linv.transpose();
  P = 0.5 * (P + P.transpose());
  double lmin;
  if (P.rows() == 1) {
    lmin = P(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(P, Eigen::EigenvaluesOnly);
    lmin = es.eigenvalues().minCoeff();
  }
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

/// Gram matrix A A^T of the constraints.
inline MatrixXd constraint_gram(const Layout& layout) {
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& blk : layout.blocks()) {
    std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> cells;
    for (const auto& sl : blk.slices)
      for (const auto& e : sl.entries) cells[{e.row, e.col}].push_back({sl.basis, e.value});
    for (const auto& [rc, users] : cells) {
      const double w = rc.first == rc.second ? 1.0 : 2.0;
      for (const auto& [s1, v1] : users)
        for (const auto& [s2, v2] : users) trips.emplace_back(s1, s2, w * v1 * v2);
    }
  }
  Eigen::SparseMatrix<double> G(layout.num_basis(), layout.num_basis());
  G.setFromTriplets(trips.begin(), trips.end());
  return layout.factored() ? MatrixXd(layout.lift().transpose() * (G * layout.lift())) : MatrixXd(G);
}

inline bool well_conditioned(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& GA) {
  return llt.info() == Eigen::Success &&
         llt.matrixLLT().diagonal().minCoeff() > 1e-8 * std::sqrt(GA.diagonal().maxCoeff());
}

/// The interior-point iteration proper; the constraints should be linearly
/// independent.
inline SdpSolution solve_independent(const SdpProblem& problem, const SolverOptions& opt) {
  const Layout layout(problem);
  const auto& blocks = layout.blocks();
  const std::size_t nb = blocks.size();
  const int m = layout.num_constraints();
  const VectorXd& b = problem.b;
  const double n_total = static_cast<double>(layout.total_dim());

  BlockVec Cm(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    Cm[k] = MatrixXd::Zero(blocks[k].dim, blocks[k].dim);
    accumulate_sym(blocks[k].c_entries, 1.0, Cm[k]);
  }

  auto apply_A = [&](const BlockVec& Xv) {
    VectorXd v = VectorXd::Zero(layout.num_basis());
    for (std::size_t k = 0; k < nb; ++k)
      for (const auto& sl : blocks[k].slices) v[sl.basis] += inner_sym(sl.entries, Xv[k]);
    return layout.to_constraints(v);
  };
  auto apply_At = [&](const VectorXd& yv) {
    VectorXd u = layout.to_basis(yv);
    BlockVec out(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      out[k] = MatrixXd::Zero(blocks[k].dim, blocks[k].dim);
      for (const auto& sl : blocks[k].slices)
        if (u[sl.basis] != 0.0) accumulate_sym(sl.entries, u[sl.basis], out[k]);
    }
    return out;
  };

  // Starting point in the spirit of SDPT3's infeasible start.
  std::vector<double> basis_block_norm2(static_cast<std::size_t>(layout.num_basis()), 0.0);
  BlockVec X(nb), Z(nb);
  {
    std::vector<std::vector<double>> bnorm(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      double maxA = 0.0, ratio = 0.0;
      for (const auto& sl : blocks[k].slices) {
        double s = 0.0;
        for (const auto& e : sl.entries) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
        s = std::sqrt(s);
        maxA = std::max(maxA, s);
        const double bj = (!layout.factored() && sl.basis < m) ? std::abs(b[sl.basis]) : b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
        ratio = std::max(ratio, (1.0 + bj) / (1.0 + s));
      }
      const double dim = blocks[k].dim;
      const double c_norm = MatrixXd(Cm[k]).norm();
      const double xi = std::max({10.0, std::sqrt(dim), dim * ratio});
      const double eta = std::max({10.0, std::sqrt(dim), maxA, c_norm});
      X[k] = xi * MatrixXd::Identity(blocks[k].dim, blocks[k].dim);
      Z[k] = eta * MatrixXd::Identity(blocks[k].dim, blocks[k].dim);
    }
  }
  VectorXd y = VectorXd::Zero(m);

  // Used to project each primal step back onto A(dX) = rp once the Schur
  // solve has lost accuracy.
  Eigen::LLT<MatrixXd> gram;
  bool project = false;
  if (m > 0) {
    const MatrixXd GA = constraint_gram(layout);
    gram.compute(GA);
    project = well_conditioned(gram, GA);
  }

  SdpSolution sol;
  const double b_norm = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
  const double c_norm = max_abs(Cm);
  const double c_frob = frob(Cm);
  const double b_frob = b.norm();

  std::vector<Scaling> sc(nb);
  struct BestIterate {
    double merit = std::numeric_limits<double>::infinity();
    BlockVec X;
    VectorXd y;
    BlockVec Z;
    std::size_t record = 0;
  } best;
  int stall = 0;
  Status status = Status::IterationLimit;
  int iter = 0;

  for (;; ++iter) {
    const VectorXd AX = apply_A(X);
    const VectorXd rp = b - AX;
    BlockVec Rd = apply_At(y);
    for (std::size_t k = 0; k < nb; ++k) Rd[k] -= Cm[k] + Z[k];

    const double pobj = inner(Cm, X);
    const double dobj = b.dot(y);
    const double pinf = rp.size() ? rp.cwiseAbs().maxCoeff() : 0.0;
    const double dinf = max_abs(Rd);
    const double mu = inner(X, Z) / n_total;
    const double gap = std::abs(pobj - dobj);
    sol.history.push_back({iter, pobj, dobj, pinf, dinf, mu});
    if (opt.verbose)
      std::cerr << "it " << iter << " pobj " << pobj << " dobj " << dobj << " pinf " << pinf << " dinf " << dinf
                << " mu " << mu << "\n";
    const double merit = std::max({pinf, dinf, gap / (1.0 + std::abs(pobj))});
    if (merit < best.merit) best = {merit, X, y, Z, sol.history.size() - 1};

    if (pinf <= opt.feas_tol && dinf <= opt.feas_tol && gap <= opt.gap_tol * (1.0 + std::abs(pobj))) {
      status = Status::Optimal;
      break;
    }
    // Improving ray for the dual: y with A^T y psd and b^T y < 0 certifies
    // primal infeasibility.
    if (dobj < 0.0) {
      const double ray = (c_frob + frob(Rd)) / std::abs(dobj);
      if (ray <= opt.infeas_tol || (dobj < -opt.divergence && dinf <= opt.feas_tol * (1.0 + c_norm))) {
        status = Status::PrimalInfeasible;
        break;
      }
    }
    if (pobj > 0.0) {
      const double ray = (b_frob + rp.norm()) / pobj;
      if (ray <= opt.infeas_tol || (pobj > opt.divergence && pinf <= opt.feas_tol * (1.0 + b_norm))) {
        status = Status::DualInfeasible;
        break;
      }
    }
    if (iter >= opt.max_iter) {
      status = Status::IterationLimit;
      sol.message = "iteration limit reached";
      break;
    }

    bool ok = true;
    for (std::size_t k = 0; k < nb && ok; ++k) ok = nt_scaling(X[k], Z[k], sc[k]);
    if (!ok) {
      status = Status::NumericalTrouble;
      sol.message = "iterate lost positive definiteness";
      break;
    }

    // Schur complement in the basis space: H_st = <B_s, W B_t W>.
    const int nbasis = layout.num_basis();
    MatrixXd H = MatrixXd::Zero(nbasis, nbasis);
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& blk = blocks[k];
      const auto& slices = blk.slices;
      if (slices.empty()) continue;
      const MatrixXd& W = sc[k].W;
      if (blk.dim == 1) {
        const double w2 = W(0, 0) * W(0, 0);
        for (std::size_t a = 0; a < slices.size(); ++a) {
          const double va = slices[a].entries.front().value;
          for (std::size_t c = a; c < slices.size(); ++c)
            H(slices[c].basis, slices[a].basis) += va * slices[c].entries.front().value * w2;
        }
        continue;
      }
      MatrixXd Q(blk.dim, blk.dim);
      std::vector<int> support;
      for (std::size_t a = 0; a < slices.size(); ++a) {
        // Q = W B_t W assembled from the columns of W that B_t touches.
        support.clear();
        for (const auto& e : slices[a].entries) {
          support.push_back(e.row);
          support.push_back(e.col);
        }
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        const int p = static_cast<int>(support.size());
        MatrixXd S = MatrixXd::Zero(p, p);
        for (const auto& e : slices[a].entries) {
          const int i = static_cast<int>(std::lower_bound(support.begin(), support.end(), e.row) - support.begin());
          const int j = static_cast<int>(std::lower_bound(support.begin(), support.end(), e.col) - support.begin());
          S(i, j) += e.value;
          if (i != j) S(j, i) += e.value;
        }
        MatrixXd U(blk.dim, p);
        for (int c = 0; c < p; ++c) U.col(c) = W.col(support[static_cast<std::size_t>(c)]);
        Q.noalias() = U * (S * U.transpose());
        for (std::size_t c = a; c < slices.size(); ++c)
          H(slices[c].basis, slices[a].basis) += inner_sym(slices[c].entries, Q);
      }
    }
    H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
    MatrixXd M;
    if (layout.factored()) {
      const auto& N = layout.lift();
      MatrixXd HN = H * N;
      M = N.transpose() * HN;
    } else {
      M = std::move(H);
    }

    // Factor the diagonally equilibrated matrix D^-1 M D^-1.
    Eigen::LLT<MatrixXd> chol;
    VectorXd dscale;
    if (m > 0) {
      dscale = M.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
      M = dscale.asDiagonal() * M * dscale.asDiagonal();
      chol.compute(M);
      double reg = 1e-14;
      int tries = 0;
      while (chol.info() != Eigen::Success && tries < 8) {
        MatrixXd Mr = M;
        Mr.diagonal().array() += reg;
        chol.compute(Mr);
        reg *= 100.0;
        ++tries;
      }
      if (chol.info() != Eigen::Success) {
        status = Status::NumericalTrouble;
        sol.message = "Schur complement is not positive definite";
        break;
      }
    }

    // W Rd W is shared by predictor and corrector.
    BlockVec WRW(nb);
    for (std::size_t k = 0; k < nb; ++k) WRW[k] = sc[k].W * Rd[k] * sc[k].W;

    auto schur_solve = [&](const VectorXd& r) -> VectorXd { return dscale.cwiseProduct(chol.solve(dscale.cwiseProduct(r))); };

    auto direction = [&](const BlockVec& Rc, VectorXd& dy, BlockVec& dX, BlockVec& dZ) {
      BlockVec T(nb);
      for (std::size_t k = 0; k < nb; ++k) T[k] = Rc[k] - WRW[k];
      VectorXd rhs = apply_A(T) - rp;
      if (m > 0) {
        // Conjugate gradients on the operator A(W A^T(.) W) itself, with the
        // factored Schur complement as preconditioner; the assembled matrix
        // loses accuracy as the iterates approach the boundary.
        auto op = [&](const VectorXd& v) {
          BlockVec S = apply_At(v);
          for (std::size_t k = 0; k < nb; ++k) S[k] = sc[k].W * S[k] * sc[k].W;
          return apply_A(S);
        };
        dy = schur_solve(rhs);
        VectorXd res = rhs - op(dy);
        const double target = 1e-14 * rhs.norm();
        VectorXd zr = schur_solve(res);
        VectorXd dir = zr;
        double rz = res.dot(zr);
        for (int r = 0; r < 50 && res.norm() > target; ++r) {
          const VectorXd od = op(dir);
          const double curv = dir.dot(od);
          if (!(curv > 0.0)) break;
          const double alpha = rz / curv;
          dy += alpha * dir;
          res -= alpha * od;
          zr = schur_solve(res);
          const double rz_next = res.dot(zr);
          dir = zr + (rz_next / rz) * dir;
          rz = rz_next;
        }
      } else {
        dy = VectorXd();
      }
      dZ = apply_At(dy);
      for (std::size_t k = 0; k < nb; ++k) {
        dZ[k] += Rd[k];
        dX[k] = Rc[k] - sc[k].W * dZ[k] * sc[k].W;
        dX[k] = 0.5 * (dX[k] + dX[k].transpose());
      }
      if (project) {
        const BlockVec fix = apply_At(gram.solve(rp - apply_A(dX)));
        for (std::size_t k = 0; k < nb; ++k) dX[k] += fix[k];
      }
    };

    auto steps = [&](const BlockVec& dX, const BlockVec& dZ, BlockVec& sX, BlockVec& sZ, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (std::size_t k = 0; k < nb; ++k) {
        sX[k] = sc[k].Ginv * dX[k] * sc[k].Ginv.transpose();
        sZ[k] = sc[k].G.transpose() * dZ[k] * sc[k].G;
        ap = std::min(ap, max_step(sc[k].LXinv, dX[k]));
        ad = std::min(ad, max_step(sc[k].LZinv, dZ[k]));
      }
    };

    // Predictor: R_c = -X.
    BlockVec Rc(nb), dX(nb), dZ(nb), sX(nb), sZ(nb);
    VectorXd dy;
    for (std::size_t k = 0; k < nb; ++k) Rc[k] = -X[k];
    direction(Rc, dy, dX, dZ);
    double ap, ad;
    steps(dX, dZ, sX, sZ, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) mu_aff += (X[k] + ap * dX[k]).cwiseProduct(Z[k] + ad * dZ[k]).sum();
    mu_aff /= n_total;
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, expon);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector in the scaled space where X and Z are both diag(d).
    for (std::size_t k = 0; k < nb; ++k) {
      const VectorXd& d = sc[k].d;
      MatrixXd prod = sX[k] * sZ[k];
      MatrixXd Rt = -(prod + prod.transpose());  // 2 * -sym(dX dZ)
      for (Eigen::Index i = 0; i < Rt.rows(); ++i) Rt(i, i) += 2.0 * (sigma * mu - d[i] * d[i]);
      for (Eigen::Index i = 0; i < Rt.rows(); ++i)
        for (Eigen::Index j = 0; j < Rt.cols(); ++j) Rt(i, j) /= (d[i] + d[j]);
      Rc[k] = sc[k].G * Rt * sc[k].G.transpose();
      Rc[k] = 0.5 * (Rc[k] + Rc[k].transpose());
    }
    direction(Rc, dy, dX, dZ);
    steps(dX, dZ, sX, sZ, ap, ad);
    const double gamma = 0.9 + 0.09 * std::min({1.0, ap, ad});
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    if (!(std::isfinite(ap) && std::isfinite(ad)) || dy.hasNaN()) {
      status = Status::NumericalTrouble;
      sol.message = "non-finite step";
      break;
    }
    if (ap < 1e-10 && ad < 1e-10) {
      if (++stall >= 3) {
        status = Status::NumericalTrouble;
        sol.message = "step lengths stalled";
        break;
      }
    } else {
      stall = 0;
    }
    for (std::size_t k = 0; k < nb; ++k) {
      X[k] += ap * dX[k];
      Z[k] += ad * dZ[k];
      X[k] = 0.5 * (X[k] + X[k].transpose());
      Z[k] = 0.5 * (Z[k] + Z[k].transpose());
    }
    if (m > 0) y += ad * dy;
  }

  // On failure hand back the best iterate seen rather than the last one.
  std::size_t final_record = sol.history.size() - 1;
  if ((status == Status::NumericalTrouble || status == Status::IterationLimit) && !best.X.empty()) {
    X = std::move(best.X);
    y = std::move(best.y);
    Z = std::move(best.Z);
    final_record = best.record;
    if (best.merit <= opt.near_tol) {
      sol.message = "near optimal (" + sol.message + ")";
      status = Status::Optimal;
    }
  }
  // Reassemble per original block.
  const std::size_t nblocks = problem.blocks.size();
  sol.X.resize(nblocks);
  sol.Z.resize(nblocks);
  for (std::size_t k = 0; k < nblocks; ++k) {
    const int first = layout.first_internal(static_cast<int>(k));
    if (problem.blocks[k] > 0) {
      sol.X[k] = X[static_cast<std::size_t>(first)];
      sol.Z[k] = Z[static_cast<std::size_t>(first)];
    } else {
      const int s = -problem.blocks[k];
      sol.X[k] = MatrixXd::Zero(s, s);
      sol.Z[k] = MatrixXd::Zero(s, s);
      for (int i = 0; i < s; ++i) {
        sol.X[k](i, i) = X[static_cast<std::size_t>(first + i)](0, 0);
        sol.Z[k](i, i) = Z[static_cast<std::size_t>(first + i)](0, 0);
      }
    }
  }
  sol.y = y;
  sol.status = status;
  const auto& last = sol.history[final_record];
  sol.primal_value = last.primal_value;
  sol.dual_value = last.dual_value;
  sol.gap = std::abs(last.primal_value - last.dual_value);
  sol.primal_infeasibility = last.primal_infeasibility;
  sol.dual_infeasibility = last.dual_infeasibility;
  sol.iterations = iter;
  return sol;
}

}  // namespace detail

/// Primal-dual path-following interior-point method with Nesterov-Todd
/// scaling and Mehrotra predictor-corrector steps, started from an
/// infeasible point. Infeasibility is detected heuristically from diverging
/// objectives or nearly exact improving rays. Linearly dependent constraints
/// are dropped first; when they are inconsistent the primal is infeasible.
inline SdpSolution solve(const SdpProblem& problem, const SolverOptions& opt = {}) {
  using namespace detail;
  problem.validate();
  const int m = problem.num_constraints();
  if (m == 0) return solve_independent(problem, opt);
  const MatrixXd GA = constraint_gram(Layout(problem));
  if (well_conditioned(Eigen::LLT<MatrixXd>(GA), GA)) return solve_independent(problem, opt);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(GA);
  qr.setThreshold(1e-10);
  const auto r = static_cast<int>(qr.rank());
  if (r == m) return solve_independent(problem, opt);

  std::vector<int> keep(qr.colsPermutation().indices().data(), qr.colsPermutation().indices().data() + r);
  std::sort(keep.begin(), keep.end());
  std::vector<int> dropped;
  for (int j = 0, k = 0; j < m; ++j) {
    if (k < r && keep[static_cast<std::size_t>(k)] == j) ++k;
    else dropped.push_back(j);
  }
  const auto ki = Eigen::Map<const Eigen::VectorXi>(keep.data(), r);
  const auto di = Eigen::Map<const Eigen::VectorXi>(dropped.data(), static_cast<Eigen::Index>(dropped.size()));
  // A_j = sum_i alpha_ij A_keep(i) for each dropped j; b must follow.
  const MatrixXd alpha = Eigen::LLT<MatrixXd>(GA(ki, ki)).solve(GA(ki, di));
  const VectorXd mismatch = problem.b(di) - alpha.transpose() * problem.b(ki);
  const double b_norm = problem.b.cwiseAbs().maxCoeff();
  Eigen::Index worst = 0;
  if (mismatch.cwiseAbs().maxCoeff(&worst) > 1e-7 * (1.0 + b_norm)) {
    SdpSolution sol;
    sol.status = Status::PrimalInfeasible;
    sol.message = "linearly dependent constraints with inconsistent right-hand sides";
    // y = e_j - sum alpha_ij e_keep(i) has A^T y = 0; orient it so b^T y < 0.
    sol.y = VectorXd::Zero(m);
    const double sign = mismatch[worst] > 0 ? -1.0 : 1.0;
    sol.y[di[worst]] = sign;
    sol.y(ki) = -sign * alpha.col(worst);
    for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
      const int d = problem.block_dim(static_cast<int>(k));
      sol.X.push_back(MatrixXd::Zero(d, d));
      sol.Z.push_back(MatrixXd::Zero(d, d));
    }
    sol.dual_value = problem.b.dot(sol.y);
    sol.primal_infeasibility = std::abs(mismatch[worst]);
    return sol;
  }

  SdpProblem reduced = problem;
  reduced.b = problem.b(ki);
  if (problem.has_explicit_constraints() || !problem.factored) {
    reduced.factored.reset();
    reduced.A.clear();
    for (int j : keep) reduced.A.push_back(problem.A[static_cast<std::size_t>(j)]);
  } else {
    Eigen::SparseMatrix<double> S(m, r);
    for (int i = 0; i < r; ++i) S.insert(keep[static_cast<std::size_t>(i)], i) = 1.0;
    reduced.factored->lift = problem.factored->lift * S;
  }
  SdpSolution sol = solve_independent(reduced, opt);
  VectorXd y = VectorXd::Zero(m);
  if (sol.y.size() == r) y(ki) = sol.y;
  sol.y = std::move(y);
  return sol;
}

}  // namespace ncpop::sdp

#endif  // NCPOP_SDP_SOLVER_HPP
