#include <gtest/gtest.h>

#include <Eigen/QR>

#include "ncpop/evaluate.hpp"
#include "ncpop/gram.hpp"
#include "ncpop/parse.hpp"
#include "ncpop/sdp/solver.hpp"
#include "support.hpp"

using namespace ncpop;

namespace {

const char* kT = "1+2*x+x^2+x*y^2+2*y^2+y^2*x+y*x^2*y+y^4";

NcPolynomial poly(const char* s, int n = 2) { return parse_polynomial(s, n); }

// The psd Gram matrix of t: (1+x+y^2)(1+x+y^2)^T + (xy)(xy)^T on 1,x,y,x^2,xy,yx,y^2.
Eigen::MatrixXd t_gram() {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(7), b = Eigen::VectorXd::Zero(7);
  a[0] = a[1] = a[6] = 1.0;
  b[4] = 1.0;
  return a * a.transpose() + b * b.transpose();
}

// Constraint coefficient matrix over the upper-triangle cells of G.
Eigen::MatrixXd cell_matrix(const GramSystem& sys) {
  const int s = static_cast<int>(sys.basis.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys.constraints.size()), s * (s + 1) / 2);
  auto cell = [s](int u, int v) { return u * s - u * (u - 1) / 2 + (v - u); };
  for (std::size_t j = 0; j < sys.constraints.size(); ++j)
    for (const auto& e : sys.constraints[j].entries)
      m(static_cast<Eigen::Index>(j), cell(e.row, e.col)) += to_double(e.value) * (e.row == e.col ? 1.0 : 2.0);
  return m;
}

}  // namespace

// G(a, b, c) from the worked example of t.
Eigen::MatrixXd t_family(double a, double b, double c) {
  Eigen::MatrixXd G = t_gram();
  G(0, 3) = G(3, 0) = a;
  G(1, 1) = 1 - 2 * a;
  G(0, 6) = G(6, 0) = b;
  G(2, 2) = 2 - 2 * b;
  G(1, 6) = G(6, 1) = 1 - c;
  G(2, 5) = G(5, 2) = c;
  return G;
}

TEST(GramSystem, TFamilyIsFeasible) {
  const GramSystem sys = build_gram_system(poly(kT), 2, Mode::Eigenvalue);
  EXPECT_EQ(sys.basis.size(), 7u);
  EXPECT_FALSE(sys.symmetrized);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd G = t_family(g(rng), g(rng), g(rng));
    for (const auto& c : sys.constraints) EXPECT_NEAR(c.apply(G), to_double(c.rhs), 1e-12);
    EXPECT_LE(max_abs_coefficient(gram_to_poly(G, sys.basis) - poly(kT).to_double()), 1e-12);
  }
  // One row per {w, w*} pair of degree <= 4 (13 symmetric words, 9 pairs),
  // each on disjoint cells, leaves 28 - 22 free directions; the family above
  // spans three of them.
  EXPECT_EQ(sys.constraints.size(), 22u);
  const Eigen::MatrixXd m = cell_matrix(sys);
  EXPECT_EQ(m.cols() - Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(m).rank(), 6);
  EXPECT_LT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t_family(0.1, 0, 0)).eigenvalues().minCoeff(), 0.0);
}

TEST(GramSystem, ConstantAtOrderZero) {
  const GramSystem sys = build_gram_system(NcPolynomial(2, Rational(1)), 0, Mode::Eigenvalue);
  ASSERT_EQ(sys.constraints.size(), 1u);
  ASSERT_EQ(sys.constraints[0].entries.size(), 1u);
  EXPECT_EQ(sys.constraints[0].rhs, Rational(2));
  EXPECT_EQ(sys.constraints[0].entries[0].value, Rational(2));
  Eigen::MatrixXd G(1, 1);
  G << 1.0;
  EXPECT_DOUBLE_EQ(sys.constraints[0].apply(G), 2.0);
}

TEST(GramSystem, CommutatorInTraceModeIsZero) {
  const GramSystem sys = build_gram_system(poly("x*y-y*x"), 1, Mode::Trace);
  for (const auto& c : sys.constraints) EXPECT_EQ(c.rhs, Rational(0));
  const Eigen::MatrixXd G = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& c : sys.constraints) EXPECT_EQ(c.apply(G), 0.0);
}

TEST(GramSystem, SymmetrizesInEigenvalueMode) {
  const GramSystem sys = build_gram_system(poly("x*y"), 1, Mode::Eigenvalue);
  EXPECT_TRUE(sys.symmetrized);
  EXPECT_EQ(sys.target, poly("1/2*x*y+1/2*y*x"));
}

TEST(GramSystem, DegreeOverflow) {
  EXPECT_THROW(build_gram_system(poly(kT), 1, Mode::Eigenvalue), std::domain_error);
}

TEST(GramSystem, ThreeCaseFormula) {
  const GramSystem sys = build_gram_system(poly(kT), 2, Mode::Eigenvalue);
  const auto& W = sys.basis;
  for (const auto& c : sys.constraints) {
    const Word& w = c.key;
    for (const auto& e : c.entries) {
      const Word uv = W[static_cast<std::size_t>(e.row)].star() * W[static_cast<std::size_t>(e.col)];
      if (w.is_symmetric()) {
        EXPECT_EQ(uv, w);
        EXPECT_EQ(e.value, Rational(2));
      } else {
        EXPECT_TRUE(uv == w || uv == w.star());
        EXPECT_EQ(e.value, Rational(1));
      }
    }
  }
}

// Every upper-triangle cell (u, v) appears in exactly one row, in both modes.
TEST(GramSystem, CellsCoveredOnce) {
  for (Mode mode : {Mode::Eigenvalue, Mode::Trace}) {
    const GramSystem sys = build_gram_system(NcPolynomial(3), 2, mode);
    const int s = static_cast<int>(sys.basis.size());
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(s, s);
    for (const auto& c : sys.constraints)
      for (const auto& e : c.entries) {
        ASSERT_LE(e.row, e.col);
        ++count(e.row, e.col);
      }
    for (int u = 0; u < s; ++u)
      for (int v = u; v < s; ++v) EXPECT_EQ(count(u, v), 1);
  }
}

TEST(GramSystem, TraceRowsAreCyclicClasses) {
  const GramSystem sys = build_gram_system(NcPolynomial(2), 2, Mode::Trace);
  for (const auto& c : sys.constraints) {
    EXPECT_EQ(cyclic_canonical(c.key), c.key);
    for (const auto& e : c.entries)
      EXPECT_EQ(cyclic_canonical(sys.basis[static_cast<std::size_t>(e.row)].star() * sys.basis[static_cast<std::size_t>(e.col)]),
                c.key);
  }
}

// Exact oracle: f = sum g_i* g_i built from rational g_i, the coefficient
// outer products form a feasible Gram point of the system in exact arithmetic.
TEST(GramSystem, ExplicitFactorizationIsFeasibleExactly) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3, d = 1 + trial % 2;
    const WordBasis basis(n, d);
    const std::size_t s = basis.size();
    std::vector<std::vector<Rational>> G(s, std::vector<Rational>(s, Rational(0)));
    NcPolynomial f(n);
    for (int k = 0; k < 3; ++k) {
      const NcPolynomial g = test::random_polynomial(rng, n, d, 4);
      f += g.star() * g;
      std::vector<Rational> coef(s, Rational(0));
      for (const auto& [w, c] : g.terms()) coef[basis.index(w)] = c;
      for (std::size_t u = 0; u < s; ++u)
        for (std::size_t v = 0; v < s; ++v) G[u][v] += coef[u] * coef[v];
    }
    for (Mode mode : {Mode::Eigenvalue, Mode::Trace}) {
      const GramSystem sys = build_gram_system(f, d, mode);
      for (const auto& c : sys.constraints) {
        Rational acc(0);
        for (const auto& e : c.entries) {
          const Rational& g = G[static_cast<std::size_t>(e.row)][static_cast<std::size_t>(e.col)];
          acc += e.row == e.col ? e.value * g : Rational(2) * e.value * g;
        }
        EXPECT_EQ(acc, c.rhs);
      }
    }
  }
}

TEST(GramToPoly, Identity) {
  const WordBasis b(2, 1);
  EXPECT_EQ(gram_to_poly(Eigen::MatrixXd::Identity(3, 3), b), poly("1+x^2+y^2").to_double());
}

TEST(GramToPoly, TGramMatrix) {
  EXPECT_EQ(gram_to_poly(t_gram(), WordBasis(2, 2)), poly(kT).to_double());
}

TEST(GramToPoly, SizeMismatch) {
  EXPECT_THROW(gram_to_poly(Eigen::MatrixXd::Identity(2, 2), WordBasis(2, 1)), std::invalid_argument);
}

// The feasible set of t is the single point G(0,0,0); the solver must find it
// and its expansion must be t.
TEST(GramToPoly, SolvedGramExpandsToTarget) {
  const GramSystem sys = build_gram_system(poly(kT), 2, Mode::Eigenvalue);
  const sdp::SdpSolution sol = sdp::solve(to_sdp(sys));
  ASSERT_EQ(sol.status, sdp::Status::Optimal) << sol.message;
  const Eigen::MatrixXd G = 0.5 * (sol.X[0] + sol.X[0].transpose());
  EXPECT_LE((G - t_gram()).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LE(max_abs_coefficient(gram_to_poly(G, sys.basis) - poly(kT).to_double()), 1e-7);
}

TEST(GramToPoly, SolvedGramOfNonSymmetricTarget) {
  const NcPolynomial p = poly("1+x*y"), q = poly("x-y^2");
  const GramSystem sys = build_gram_system(p.star() * p + q.star() * q + poly("x*y-y*x"), 2, Mode::Eigenvalue);
  EXPECT_TRUE(sys.symmetrized);
  const sdp::SdpSolution sol = sdp::solve(to_sdp(sys));
  ASSERT_EQ(sol.status, sdp::Status::Optimal) << sol.message;
  EXPECT_LE(max_abs_coefficient(gram_to_poly(sol.X[0], sys.basis) - sys.target.to_double()), 1e-7);
}

TEST(ExtractSohs, TDecompositionSpan) {
  const WordBasis basis(2, 2);
  const SohsCertificate cert = extract_sohs(t_gram(), basis);
  ASSERT_EQ(cert.summands.size(), 2u);
  EXPECT_LE(cert.residual_norm, 1e-12);
  // Summands lie in span{1+x+y^2, xy}: each coefficient vector is a combination of the two.
  Eigen::MatrixXd span(7, 2);
  span.setZero();
  span(0, 0) = span(1, 0) = span(6, 0) = 1.0;
  span(4, 1) = 1.0;
  for (const auto& g : cert.summands) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
    for (const auto& [w, c] : g.terms()) v[static_cast<Eigen::Index>(basis.index(w))] = c;
    const Eigen::VectorXd fit = span * span.colPivHouseholderQr().solve(v);
    EXPECT_LE((fit - v).norm(), 1e-10);
  }
}

TEST(ExtractSohs, ZeroMatrixGivesEmptyCertificate) {
  const WordBasis basis(2, 1);
  const SohsCertificate cert = extract_sohs(Eigen::MatrixXd::Zero(3, 3), basis, 1e-8, poly("1+x^2").to_double());
  EXPECT_TRUE(cert.summands.empty());
  EXPECT_EQ(cert.residual, poly("1+x^2").to_double());
}

TEST(ExtractSohs, RejectsIndefinite) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(3, 3);
  G(2, 2) = -1e-3;
  EXPECT_THROW(extract_sohs(G, WordBasis(2, 1)), std::domain_error);
}

TEST(ExtractSohs, RandomFactorizationOracle) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3, d = 1 + trial % 3;
    const WordBasis basis(n, d);
    const auto s = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng() % static_cast<unsigned>(s));
    Eigen::MatrixXd R(r, s);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < s; ++j) R(i, j) = g(rng);
    const Eigen::MatrixXd G = R.transpose() * R;
    const SohsCertificate cert = extract_sohs(G, basis);
    EXPECT_LE(cert.summands.size(), basis.size());
    EXPECT_LE(static_cast<Eigen::Index>(cert.summands.size()), r);
    const NcPolynomialD diff = sum_of_hermitian_squares(cert.summands, n) - gram_to_poly(G, basis);
    EXPECT_LE(max_abs_coefficient(diff), 1e-10 * (1.0 + G.norm()));
    EXPECT_LE(cert.residual_norm, static_cast<double>(s) * 1e-8 * G.norm());
  }
}

// Sums of hermitian squares are matrix positive on every symmetric tuple.
TEST(ExtractSohs, CertificateSoundness) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  const WordBasis basis(2, 2);
  Eigen::MatrixXd R(3, 7);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = g(rng);
  const SohsCertificate cert = extract_sohs(R.transpose() * R, basis);
  const NcPolynomialD f = sum_of_hermitian_squares(cert.summands, 2);
  double worst = 1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const auto A = test::random_point(rng, 2, 1 + trial % 4);
    worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(evaluate(f, A)).eigenvalues().minCoeff());
  }
  EXPECT_GE(worst, -1e-7);
}

TEST(GramFace, TPolynomialDropsForcedRows) {
  const GramSystem sys = build_gram_system(poly(kT), 2, Mode::Eigenvalue);
  GramFace face = gram_face(sys);
  EXPECT_FALSE(face.infeasible);
  // x^2 and yx have zero diagonal entries; the top block on xy, y^2 is fixed and regular.
  EXPECT_EQ(face.kept.size(), 5u);
  const Eigen::MatrixXd G = t_gram();
  Eigen::MatrixXd H(5, 5);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b)
      H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          G(static_cast<Eigen::Index>(face.kept[a]), static_cast<Eigen::Index>(face.kept[b]));
  EXPECT_LE((face.expand(H) - G).cwiseAbs().maxCoeff(), 1e-14);
  const sdp::SdpProblem p = to_sdp(sys, face);
  const sdp::SdpSolution s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal);
  EXPECT_LE((face.expand(s.X[0]) - G).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GramFace, FoldsSingularTopBlock) {
  // Top part (x^2+y^2)^2 has the rank one block [[1,1],[1,1]] on x^2, y^2.
  const GramSystem sys = build_gram_system(poly("x^2*y^2+y^2*x^2+x^4+y^4+1"), 2, Mode::Eigenvalue);
  GramFace face = gram_face(sys);
  std::size_t folded = 0;
  for (std::size_t u = 0; u < face.rows.size(); ++u)
    if (!face.rows[u].empty() && std::find(face.kept.begin(), face.kept.end(), u) == face.kept.end()) ++folded;
  EXPECT_EQ(folded, 1u);
  const sdp::SdpSolution s = sdp::solve(to_sdp(sys, face));
  ASSERT_EQ(s.status, sdp::Status::Optimal);
  const Eigen::MatrixXd G = face.expand(s.X[0]);
  EXPECT_LE(max_abs_coefficient(gram_to_poly(G, sys.basis) - sys.target.to_double()), 1e-7);
}

TEST(GramFace, DetectsUnmatchableCoefficient) {
  // G(x^2, x^2) = 0 kills row x^2, and then x^3 has no cell left.
  const GramSystem sys = build_gram_system(poly("x1^3", 1), 2, Mode::Eigenvalue);
  GramFace face = gram_face(sys);
  to_sdp(sys, face);
  EXPECT_TRUE(face.infeasible);
}

// Every psd Gram matrix of an SOHS lies on the face.
TEST(GramFace, ContainsEveryFactorization) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 3;
    const int d = 1 + trial % 2;
    const WordBasis W(n, d);
    const auto s = static_cast<Eigen::Index>(W.size());
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(1 + trial % 3, s);
    std::uniform_int_distribution<int> coef(-3, 3), pick(0, static_cast<int>(s) - 1);
    for (Eigen::Index i = 0; i < R.rows(); ++i)
      for (int k = 0; k < 3; ++k) R(i, pick(rng)) = coef(rng);
    const Eigen::MatrixXd G = R.transpose() * R;
    const NcPolynomial f = to_rational(gram_to_poly(G, W));
    if (f.is_zero()) continue;
    const GramSystem sys = build_gram_system(f, d, Mode::Eigenvalue);
    GramFace face = gram_face(sys);
    const sdp::SdpProblem p = to_sdp(sys, face);
    ASSERT_FALSE(face.infeasible) << to_string(f);
    const auto k = static_cast<Eigen::Index>(face.kept.size());
    Eigen::MatrixXd H(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) H(a, b) = G(static_cast<Eigen::Index>(face.kept[a]), static_cast<Eigen::Index>(face.kept[b]));
    EXPECT_LE((face.expand(H) - G).cwiseAbs().maxCoeff(), 1e-12) << to_string(f);
    for (int j = 0; j < p.num_constraints(); ++j) {
      double lhs = 0.0;
      for (const auto& e : p.A[static_cast<std::size_t>(j)].entries())
        lhs += e.row == e.col ? e.value * H(e.row, e.col) : 2.0 * e.value * H(e.row, e.col);
      EXPECT_NEAR(lhs, p.b[j], 1e-9);
    }
  }
}
