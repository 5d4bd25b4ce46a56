#include <random>

#include <gtest/gtest.h>

#include "ncpop/sdp/solver.hpp"
#include "sdp_fixtures.hpp"

using namespace ncpop::sdp;
using ncpop::test::constructed_problem;

TEST(SdpSolver, ScalarProblem) {
  SdpProblem p;
  p.blocks = {1};
  p.C.add(0, 0, 0, -1.0);
  BlockMatrix a;
  a.add(0, 0, 0, 1.0);
  p.A.push_back(a);
  p.b = Eigen::VectorXd::Constant(1, 1.0);
  auto s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.primal_value, -1.0, 1e-8);
  EXPECT_NEAR(s.dual_value, -1.0, 1e-8);
  EXPECT_NEAR(s.X[0](0, 0), 1.0, 1e-8);
  EXPECT_NEAR(s.y[0], -1.0, 1e-8);
}

TEST(SdpSolver, ConstructedOptimum) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto c = constructed_problem(seed);
    auto s = solve(c.problem);
    ASSERT_EQ(s.status, Status::Optimal) << "seed " << seed;
    EXPECT_LE(std::abs(s.primal_value - c.value), 1e-6 * (1.0 + std::abs(c.value))) << "seed " << seed;
    EXPECT_LE(std::abs(s.dual_value - c.value), 1e-6 * (1.0 + std::abs(c.value))) << "seed " << seed;
    EXPECT_LE(s.primal_infeasibility, 1e-8);
    for (const auto& x : s.X) EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(x).eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(SdpSolver, DiagonalBlock) {
  // maximize -x1 - 2 x2 subject to x1 + x2 = 1, x >= 0.
  SdpProblem p;
  p.blocks = {-2};
  p.C.add(0, 0, 0, -1.0);
  p.C.add(0, 1, 1, -2.0);
  BlockMatrix a;
  a.add(0, 0, 0, 1.0);
  a.add(0, 1, 1, 1.0);
  p.A.push_back(a);
  p.b = Eigen::VectorXd::Constant(1, 1.0);
  auto s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.primal_value, -1.0, 1e-7);
  EXPECT_NEAR(s.X[0](0, 0), 1.0, 1e-6);
  EXPECT_NEAR(s.X[0](1, 1), 0.0, 1e-6);
}

TEST(SdpSolver, PrimalInfeasible) {
  // <I, X> = -1 has no psd solution.
  for (int n : {1, 2, 3}) {
    SdpProblem p;
    p.blocks = {n};
    BlockMatrix a;
    for (int i = 0; i < n; ++i) {
      a.add(0, i, i, 1.0);
      p.C.add(0, i, i, -1.0);
    }
    p.C.normalize();
    p.A.push_back(a);
    p.b = Eigen::VectorXd::Constant(1, -1.0);
    auto s = solve(p);
    EXPECT_EQ(s.status, Status::PrimalInfeasible) << "n " << n;
  }
}

TEST(SdpSolver, DualInfeasible) {
  // maximize X_22 subject to X_11 = 1: unbounded above.
  SdpProblem p;
  p.blocks = {2};
  p.C.add(0, 1, 1, 1.0);
  BlockMatrix a;
  a.add(0, 0, 0, 1.0);
  p.A.push_back(a);
  p.b = Eigen::VectorXd::Constant(1, 1.0);
  auto s = solve(p);
  EXPECT_EQ(s.status, Status::DualInfeasible);
}

TEST(SdpSolver, FactoredMatchesExplicit) {
  auto c = constructed_problem(7);
  // Express every A_j through a basis made of the A_j themselves plus a lift.
  SdpProblem f;
  f.blocks = c.problem.blocks;
  f.C = c.problem.C;
  f.b = c.problem.b;
  FactoredConstraints fc;
  fc.basis = c.problem.A;
  fc.lift.resize(static_cast<Eigen::Index>(fc.basis.size()), c.problem.b.size());
  fc.lift.setIdentity();
  f.factored = fc;
  auto a = solve(c.problem);
  auto b = solve(f);
  ASSERT_EQ(b.status, Status::Optimal);
  EXPECT_NEAR(a.primal_value, b.primal_value, 1e-9 * (1.0 + std::abs(a.primal_value)));
  auto m = f.materialized();
  EXPECT_EQ(m.A.size(), c.problem.A.size());
  for (std::size_t j = 0; j < m.A.size(); ++j) EXPECT_EQ(m.A[j], c.problem.A[j]);
}

TEST(SdpSolver, WeakDualityAlongIterates) {
  auto c = constructed_problem(11);
  auto s = solve(c.problem);
  for (const auto& it : s.history)
    if (it.primal_infeasibility <= 1e-8 && it.dual_infeasibility <= 1e-8)
      EXPECT_LE(it.primal_value, it.dual_value + 1e-9 * (1.0 + std::abs(it.dual_value)));
}

TEST(SdpSolver, DuplicatedConstraintIsRemoved) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = constructed_problem(seed);
    SdpProblem p = c.problem;
    BlockMatrix twice;
    for (const auto& e : p.A[0].entries()) twice.add(e.block, e.row, e.col, 2.0 * e.value);
    p.A.push_back(twice);
    p.b.conservativeResize(p.b.size() + 1);
    p.b[p.b.size() - 1] = 2.0 * p.b[0];
    auto s = solve(p);
    ASSERT_EQ(s.status, Status::Optimal) << "seed " << seed;
    EXPECT_LE(std::abs(s.primal_value - c.value), 1e-6 * (1.0 + std::abs(c.value))) << "seed " << seed;
    EXPECT_EQ(s.y.size(), p.b.size());
  }
}

TEST(SdpSolver, InconsistentDuplicateIsInfeasible) {
  auto c = constructed_problem(4);
  SdpProblem p = c.problem;
  p.A.push_back(p.A[0]);
  p.b.conservativeResize(p.b.size() + 1);
  p.b[p.b.size() - 1] = p.b[0] + 1.0;
  auto s = solve(p);
  EXPECT_EQ(s.status, Status::PrimalInfeasible);
}
