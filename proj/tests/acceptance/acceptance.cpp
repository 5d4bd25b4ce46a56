// Acceptance run: one PASS/FAIL line per criterion.
//
//   ncpop_acceptance --cli build/ncpop [--problems problems]
//
// Criteria 1-5 drive the command line tool; 6 reuses their records; 7 and 8
// call the library directly.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncpop/gram.hpp"
#include "ncpop/hierarchy.hpp"
#include "ncpop/parse.hpp"
#include "ncpop/sdp/sdpa.hpp"
#include "ncpop/sdp/solver.hpp"
#include "sdp_fixtures.hpp"
#include "support.hpp"

using nlohmann::json;
using namespace ncpop;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct CliRun {
  int exit_code = -1;
  json record;
  double seconds = 0.0;
  std::string error;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

CliRun run_cli(const std::string& cli, const std::vector<std::string>& args) {
  std::string cmd = quote(cli);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  CliRun r;
  const auto t0 = Clock::now();
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    r.error = "cannot start " + cli;
    return r;
  }
  std::string out;
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.seconds = since(t0);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  try {
    r.record = json::parse(out);
  } catch (const std::exception& e) {
    r.error = std::string("output is not JSON: ") + e.what();
  }
  return r;
}

double num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -INFINITY;
    if (s == "inf") return INFINITY;
  }
  return NAN;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << what << std::endl;
}

// Finite records kept for the strong duality criterion.
std::vector<std::pair<std::string, json>> finite_records;

void keep(const std::string& name, const CliRun& r) {
  if (r.error.empty() && r.record.value("status", "") == "optimal") finite_records.emplace_back(name, r.record);
}

const char* kT = "1+2*x+x^2+x*y^2+2*y^2+y^2*x+y*x^2*y+y^4";

// ---------------------------------------------------------------------------

void criterion1(const std::string& cli, const std::string& dir) {
  const CliRun r = run_cli(cli, {"sohs-check", "--order", "2", dir + "/t.txt"});
  std::string msg = "sohs-check t(x,y) d=2";
  bool ok = r.error.empty() && r.exit_code == 0 && r.record.value("status", "") == "feasible";
  double coef_err = INFINITY, span_err = INFINITY;
  int rank = 0;
  if (ok) {
    const WordBasis W(2, 2);
    std::vector<NcPolynomialD> gs;
    for (const auto& s : r.record["certificate"]["sohs"]) gs.push_back(parse_polynomial(s.get<std::string>(), 2).to_double());
    coef_err = max_abs_coefficient(sum_of_hermitian_squares(gs, 2) - parse_polynomial(kT, 2).to_double());
    // Coefficient vectors of the summands against span{1+x+y^2, xy}.
    Eigen::MatrixXd S(static_cast<Eigen::Index>(gs.size()), 7);
    S.setZero();
    for (std::size_t k = 0; k < gs.size(); ++k)
      for (const auto& [w, c] : gs[k].terms()) S(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(W.index(w))) = c;
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(2, 7);
    ref(0, 0) = ref(0, 1) = ref(0, 6) = 1.0;
    ref(1, 4) = 1.0;
    const Eigen::MatrixXd Q = ref.transpose().householderQr().householderQ() * Eigen::MatrixXd::Identity(7, 2);
    span_err = (S.transpose() - Q * (Q.transpose() * S.transpose())).cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > 1e-6;
    ok = coef_err <= 1e-6 && span_err <= 1e-6 && rank == 2 && r.seconds < 1.0;
  }
  msg += ": coefficient error " + fmt(coef_err) + " (<= 1e-6), span error " + fmt(span_err) + ", rank " +
         std::to_string(rank) + " (== 2), " + fmt(r.seconds) + " s (< 1 s)";
  report(1, ok, msg + (r.error.empty() ? "" : "; " + r.error));
}

void criterion2(const std::string& cli, const std::string& dir) {
  const CliRun r = run_cli(cli, {"trace-min", "--order", "2", dir + "/t.txt"});
  const double b = r.error.empty() ? num(r.record["bound"]) : NAN;
  keep("trace-min t", r);
  report(2, r.exit_code == 0 && std::abs(b) <= 1e-6 && r.seconds < 1.0,
         "trace-min t(x,y) d=2: bound " + fmt(b) + " (|bound| <= 1e-6), " + fmt(r.seconds) + " s (< 1 s)");
}

void criterion3(const std::string& cli, const std::string& dir) {
  const CliRun r = run_cli(cli, {"trace-min", "--order", "3", dir + "/motzkin.txt"});
  const double b = r.error.empty() ? num(r.record["bound"]) : NAN;
  report(3, r.exit_code == 2 && std::isinf(b) && b < 0 && r.seconds < 10.0,
         "trace-min Motzkin d=3: bound " + fmt(b) + ", status " + r.record.value("status", "?") + ", exit " +
             std::to_string(r.exit_code) + " (== 2), " + fmt(r.seconds) + " s (< 10 s)");
}

void criterion4(const std::string& cli) {
  const CliRun r = run_cli(cli, {"eig-min", "--preset", "chsh", "--order", "2"});
  const double b = r.error.empty() ? num(r.record["bound"]) : NAN;
  const double v = r.error.empty() && r.record.contains("max_violation") ? num(r.record["max_violation"]) : NAN;
  const double t = 2.0 * std::sqrt(2.0);
  keep("chsh", r);
  report(4, r.exit_code == 0 && std::abs(b + t) <= 1e-4 && std::abs(v - t) <= 1e-4 && r.seconds < 30.0,
         "eig-min CHSH d=2: bound " + fmt(b) + " (-2 sqrt 2 +- 1e-4), max violation " + fmt(v) + ", " + fmt(r.seconds) +
             " s (< 30 s)");
}

void criterion5(const std::string& cli, const std::string& dir) {
  const CliRun r2 = run_cli(cli, {"psd-rank", "--order", "2", dir + "/psdrank.csv"});
  const CliRun r3 = run_cli(cli, {"psd-rank", "--order", "3", dir + "/psdrank.csv"});
  const CliRun r1 = run_cli(cli, {"psd-rank", "--order", "2", dir + "/rank1.csv"});
  const double b2 = r2.error.empty() ? num(r2.record["bound"]) : NAN;
  const double b3 = r3.error.empty() ? num(r3.record["bound"]) : NAN;
  const double b1 = r1.error.empty() ? num(r1.record["bound"]) : NAN;
  keep("psd-rank d=2", r2);
  keep("psd-rank d=3", r3);
  keep("psd-rank rank one", r1);
  const bool ok = r2.exit_code == 0 && r3.exit_code == 0 && r1.exit_code == 0 && std::abs(b2 - 1.90903) <= 1e-3 &&
                  std::abs(b3 - 1.90903) <= 1e-3 && b1 <= 1.0 + 1e-6 && r3.seconds < 60.0;
  report(5, ok,
         "psd-rank: rho2 " + fmt(b2) + ", rho3 " + fmt(b3) + " (1.90903 +- 1e-3), rank one " + fmt(b1) +
             " (<= 1 + 1e-6), d=3 in " + fmt(r3.seconds) + " s (< 60 s)");
}

void criterion6(const std::string& cli, const std::string& dir) {
  // Also the eigenvalue program for t and the ball example.
  keep("eig-min t", run_cli(cli, {"eig-min", "--order", "2", dir + "/t.txt"}));
  keep("eig-min ball", run_cli(cli, {"eig-min", dir + "/ball.txt"}));
  keep("trace-min square", run_cli(cli, {"trace-min", dir + "/square.txt"}));
  bool ok = finite_records.size() >= 7;
  double worst = 0.0;
  std::string worst_name = "-";
  for (const auto& [name, rec] : finite_records) {
    const double p = num(rec["bounds"]["primal"]), d = num(rec["bounds"]["dual"]);
    const double ratio = std::abs(p - d) / (1e-6 * (1.0 + std::abs(d)));
    if (!(ratio <= 1.0)) ok = false;
    if (!(ratio <= worst)) {
      worst = ratio;
      worst_name = name;
    }
  }
  report(6, ok,
         "strong duality on " + std::to_string(finite_records.size()) + " finite programs: worst |primal - dual| / (1e-6 (1 + |v|)) = " +
             fmt(worst) + " (" + worst_name + ", <= 1)");
}

void criterion7() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> cnum(-40, 40), nterms(1, 3);
  int bad_lower = 0, bad_upper = 0, bad_status = 0, bad_sandwich = 0;
  double worst_lower = INFINITY;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = trial % 5 == 4 ? 3 : 2;
    const Mode mode = trial % 2 ? Mode::Trace : Mode::Eigenvalue;
    const Rational c(cnum(rng), 8);
    NcPolynomial f(n, c);
    for (int k = 0, m = nterms(rng); k < m; ++k) {
      const NcPolynomial g = test::random_polynomial(rng, n, 2, 4);
      f += g.star() * g;
    }
    const NcProblem p = unconstrained_problem(f, 2, mode);
    const BoundReport r = solve_program(build_program(p));
    if (!r.finite()) {
      ++bad_status;
      continue;
    }
    const double lower = r.bound() - to_double(c);
    worst_lower = std::min(worst_lower, lower);
    if (lower < -1e-6) ++bad_lower;
    if (r.dual_bound > r.primal_bound + 1e-6 * (1.0 + std::abs(r.primal_bound))) ++bad_sandwich;
    const SampleResult s = sample_upper_bound(p, {1, 2, 3}, 60, static_cast<std::uint64_t>(trial));
    if (!s.value || r.bound() > *s.value + 1e-6) ++bad_upper;
  }
  int bad_mono = 0, bad_mono_status = 0, finite_pairs = 0;
  double worst_mono = -INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    const Mode mode = trial % 2 ? Mode::Trace : Mode::Eigenvalue;
    NcPolynomial f = test::random_polynomial(rng, 2, 4, 6).symmetrized();
    f += parse_polynomial("x^4+y^4", 2);
    BoundReport lo = solve_program(build_program(unconstrained_problem(f, 2, mode)));
    BoundReport hi = solve_program(build_program(unconstrained_problem(f, 3, mode)));
    auto decided = [](const BoundReport& r) { return r.finite() || r.classified_infeasible(); };
    if (!decided(lo) || !decided(hi)) {
      ++bad_mono_status;
      continue;
    }
    if (lo.finite() && hi.finite()) ++finite_pairs;
    const double diff = lo.bound() - hi.bound();
    if (std::isfinite(diff)) worst_mono = std::max(worst_mono, diff);
    if (!(lo.bound() <= hi.bound() + 1e-7)) ++bad_mono;
  }
  const double secs = since(t0);
  const bool ok = bad_lower + bad_upper + bad_status + bad_sandwich + bad_mono + bad_mono_status == 0 && secs < 300.0;
  report(7, ok,
         "sandwich over 50 SOHS-constructed objectives: min(bound - c) " + fmt(worst_lower) + " (>= -1e-6), " +
             std::to_string(bad_upper) + " above sample bound, " + std::to_string(bad_status + bad_sandwich) +
             " unsolved or inverted; monotonicity over 20 f (" + std::to_string(finite_pairs) +
             " finite pairs): max bound(2) - bound(3) " + fmt(worst_mono) + " (<= 1e-7), " +
             std::to_string(bad_mono + bad_mono_status) + " violations; " + fmt(secs) + " s (< 300 s)");
}

void criterion8() {
  using namespace ncpop::sdp;
  const auto t0 = Clock::now();
  int opt_fail = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto c = test::constructed_problem(seed);
    const SdpSolution s = solve(c.problem);
    const double e = std::max(std::abs(s.primal_value - c.value), std::abs(s.dual_value - c.value)) / (1.0 + std::abs(c.value));
    worst = std::max(worst, e);
    if (s.status != Status::Optimal || e > 1e-6) ++opt_fail;
  }
  // Infeasible by construction: <I, X> = -1, or alongside a constructed problem.
  int infeas_fail = 0, infeas_total = 0;
  for (int n = 1; n <= 4; ++n) {
    SdpProblem p;
    p.blocks = {n};
    BlockMatrix a;
    for (int i = 0; i < n; ++i) a.add(0, i, i, 1.0);
    p.A.push_back(a);
    p.b = Eigen::VectorXd::Constant(1, -1.0);
    ++infeas_total;
    if (solve(p).status != Status::PrimalInfeasible) ++infeas_fail;
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = test::constructed_problem(seed);
    BlockMatrix tr;
    for (std::size_t k = 0; k < c.problem.blocks.size(); ++k)
      for (int i = 0; i < c.problem.block_dim(static_cast<int>(k)); ++i) tr.add(static_cast<int>(k), i, i, 1.0);
    c.problem.A.push_back(tr);
    c.problem.b.conservativeResize(c.problem.b.size() + 1);
    c.problem.b[c.problem.b.size() - 1] = -1.0;
    ++infeas_total;
    if (solve(c.problem).status != Status::PrimalInfeasible) ++infeas_fail;
  }
  {
    // maximize X_22 subject to X_11 = 1 is unbounded.
    SdpProblem p;
    p.blocks = {2};
    p.C.add(0, 1, 1, 1.0);
    BlockMatrix a;
    a.add(0, 0, 0, 1.0);
    p.A.push_back(a);
    p.b = Eigen::VectorXd::Constant(1, 1.0);
    ++infeas_total;
    if (solve(p).status != Status::DualInfeasible) ++infeas_fail;
  }
  // SDPA round trip on random problems and on a real relaxation.
  int trip_fail = 0, trips = 0;
  std::mt19937_64 rng(5);
  auto check_trip = [&](const SdpProblem& p) {
    const SdpProblem m = p.materialized();
    const SdpProblem q = import_sdpa(export_sdpa(p));
    bool same = q.blocks == m.blocks && q.C == m.C && q.b == m.b && q.A.size() == m.A.size();
    for (std::size_t j = 0; same && j < m.A.size(); ++j) same = q.A[j] == m.A[j];
    same = same && export_sdpa(q) == export_sdpa(p);
    ++trips;
    if (!same) ++trip_fail;
  };
  for (int t = 0; t < 300; ++t) check_trip(test::random_problem(rng));
  check_trip(build_program(chsh_problem(2)).sdp);
  check_trip(build_psd_rank_program(psd_rank_example_matrix(), 2).sdp);
  const double secs = since(t0);
  report(8, opt_fail == 0 && infeas_fail == 0 && trip_fail == 0 && secs < 60.0,
         "solver battery: 40 constructed optima, worst relative error " + fmt(worst) + " (<= 1e-6), " +
             std::to_string(opt_fail) + " failed; " + std::to_string(infeas_total - infeas_fail) + "/" +
             std::to_string(infeas_total) + " infeasible problems classified; SDPA round trip exact on " +
             std::to_string(trips - trip_fail) + "/" + std::to_string(trips) + "; " + fmt(secs) + " s (< 60 s)");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli, dir = "problems";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) cli = argv[++i];
    else if (a == "--problems" && i + 1 < argc) dir = argv[++i];
    else {
      std::cerr << "usage: ncpop_acceptance --cli PATH [--problems DIR]\n";
      return 1;
    }
  }
  if (cli.empty()) {
    std::cerr << "ncpop_acceptance: --cli is required\n";
    return 1;
  }
  criterion1(cli, dir);
  criterion2(cli, dir);
  criterion3(cli, dir);
  criterion4(cli);
  criterion5(cli, dir);
  criterion6(cli, dir);
  criterion7();
  criterion8();
  std::cout << (8 - failures) << "/8 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
