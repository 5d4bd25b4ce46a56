#ifndef NCPOP_CLI_HPP
#define NCPOP_CLI_HPP

#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ncpop/gram.hpp"
#include "ncpop/hierarchy.hpp"
#include "ncpop/parse.hpp"
#include "ncpop/sdp/sdpa.hpp"
#include "ncpop/sdp/solver.hpp"

namespace ncpop::cli {

using nlohmann::json;

/// Key-value problem description:
///
///     # comment
///     nvars 2
///     objective 1+2*x+x^2
///     ineq 1-x^2          (repeatable)
///     eq x*y-y*x          (repeatable)
///     kind trace
///     order 2
///     tol-feas 1e-8
///
/// A key may be followed by whitespace, ':' or '='.
struct ProblemFile {
  int nvars = 0;
  std::string objective;
  std::vector<std::string> inequalities;
  std::vector<std::string> equalities;
  std::optional<Mode> kind;
  std::optional<int> order;
  std::optional<double> tol_feas;
  std::optional<double> tol_gap;
  std::optional<int> max_iter;
  /// The parsed problem; `problem.order` is set only when `order` is.
  NcProblem problem;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Line {
  int number = 0;
  std::string key;
  std::string value;
  int value_column = 1;  // 1-based column where `value` starts
};

inline int parse_int_value(const Line& l) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(l.value, &used);
  } catch (const std::exception&) {
    throw ParseError("expected an integer for '" + l.key + "'", l.number, l.value_column);
  }
  if (used != l.value.size()) throw ParseError("expected an integer for '" + l.key + "'", l.number, l.value_column + static_cast<int>(used));
  return v;
}

inline double parse_double_value(const Line& l) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(l.value, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number for '" + l.key + "'", l.number, l.value_column);
  }
  if (used != l.value.size()) throw ParseError("expected a number for '" + l.key + "'", l.number, l.value_column + static_cast<int>(used));
  return v;
}

}  // namespace detail

inline ProblemFile parse_problem(const std::string& text) {
  std::vector<detail::Line> lines;
  {
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      const auto hash = raw.find('#');
      const std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
      const auto b = body.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      auto e = body.find_first_of(" \t:=", b);
      detail::Line l;
      l.number = number;
      l.key = body.substr(b, e == std::string::npos ? std::string::npos : e - b);
      if (e != std::string::npos) {
        while (e < body.size() && (body[e] == ' ' || body[e] == '\t')) ++e;
        if (e < body.size() && (body[e] == ':' || body[e] == '=')) ++e;
        while (e < body.size() && (body[e] == ' ' || body[e] == '\t')) ++e;
        l.value_column = static_cast<int>(e) + 1;
        l.value = detail::trim(body.substr(std::min(e, body.size())));
      } else {
        l.value_column = static_cast<int>(body.size()) + 1;
      }
      lines.push_back(std::move(l));
    }
  }

  ProblemFile pf;
  const detail::Line* objective_line = nullptr;
  std::vector<const detail::Line*> ineq_lines, eq_lines;
  for (const auto& l : lines) {
    if (l.key != "ineq" && l.key != "eq" && l.key != "objective" && l.value.empty())
      throw ParseError("missing value for '" + l.key + "'", l.number, l.value_column);
    if (l.key == "nvars") {
      pf.nvars = detail::parse_int_value(l);
      if (pf.nvars < 1) throw ParseError("nvars must be positive", l.number, l.value_column);
    } else if (l.key == "objective") {
      if (objective_line) throw ParseError("objective given twice", l.number, 1);
      objective_line = &l;
      pf.objective = l.value;
    } else if (l.key == "ineq") {
      ineq_lines.push_back(&l);
      pf.inequalities.push_back(l.value);
    } else if (l.key == "eq") {
      eq_lines.push_back(&l);
      pf.equalities.push_back(l.value);
    } else if (l.key == "kind") {
      try {
        pf.kind = parse_mode(l.value);
      } catch (const std::invalid_argument&) {
        throw ParseError("kind must be 'eigenvalue' or 'trace'", l.number, l.value_column);
      }
    } else if (l.key == "order") {
      pf.order = detail::parse_int_value(l);
      if (*pf.order < 0) throw ParseError("order must be nonnegative", l.number, l.value_column);
    } else if (l.key == "tol-feas") {
      pf.tol_feas = detail::parse_double_value(l);
    } else if (l.key == "tol-gap") {
      pf.tol_gap = detail::parse_double_value(l);
    } else if (l.key == "max-iter") {
      pf.max_iter = detail::parse_int_value(l);
    } else {
      throw ParseError("unknown key '" + l.key + "'", l.number, 1);
    }
  }
  if (pf.nvars == 0) throw ParseError("missing 'nvars'", 0, 1);
  if (!objective_line || pf.objective.empty())
    throw ParseError("empty objective", objective_line ? objective_line->number : 0, objective_line ? objective_line->value_column : 1);

  auto poly = [&](const detail::Line& l) {
    ParseOptions opt;
    opt.nvars = pf.nvars;
    opt.line = l.number;
    try {
      return parse_polynomial(l.value, opt);
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()).substr(std::string(e.what()).find(": ") + 2), l.number,
                       l.value_column + e.column() - 1);
    }
  };
  pf.problem.objective = poly(*objective_line);
  for (const auto* l : ineq_lines) {
    if (l->value.empty()) throw ParseError("empty inequality", l->number, l->value_column);
    NcPolynomial g = poly(*l);
    if (!g.is_symmetric()) throw ParseError("inequality is not symmetric (g* != g)", l->number, l->value_column);
    pf.problem.inequalities.push_back(std::move(g));
  }
  for (const auto* l : eq_lines) {
    if (l->value.empty()) throw ParseError("empty equality", l->number, l->value_column);
    pf.problem.equalities.push_back(poly(*l));
  }
  if (pf.kind) pf.problem.kind = *pf.kind;
  pf.problem.order = pf.order;
  return pf;
}

/// Dense matrix from comma (or whitespace) separated rows; '#' starts a comment.
inline Eigen::MatrixXd parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    if (detail::trim(raw).empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
      auto end = raw.find(',', pos);
      if (end == std::string::npos) end = raw.size();
      const std::string cell = detail::trim(raw.substr(pos, end - pos));
      const int col = static_cast<int>(pos) + 1;
      if (cell.empty()) throw ParseError("empty matrix entry", number, col);
      std::istringstream cs(cell);
      std::vector<std::string> parts;
      for (std::string t; cs >> t;) parts.push_back(t);
      for (const auto& t : parts) {
        std::size_t used = 0;
        double v = 0;
        try {
          v = std::stod(t, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != t.size() || !std::isfinite(v)) throw ParseError("malformed number '" + t + "'", number, col);
        if (v < 0) throw ParseError("matrix entries must be nonnegative", number, col);
        row.push_back(v);
      }
      pos = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(rows.front().size()), number, 1);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix", 0, 1);
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

/// One parenthesized summand per line after a comment header; "0" for an
/// empty certificate.
inline std::string render_certificate(const SohsCertificate& cert, bool alias = true) {
  if (cert.summands.empty()) return "0\n";
  std::string s = "# " + std::to_string(cert.summands.size()) + " summands g_i with f = sum g_i* g_i + residual, "
                  "residual norm " + format_double(cert.residual_norm) + "\n";
  s += "# summands are determined only up to orthogonal mixing\n";
  for (const auto& g : cert.summands) s += "(" + to_string(g, alias) + ")\n";
  return s;
}

/// Inverse of render_certificate: the listed summands.
inline std::vector<NcPolynomialD> parse_certificate(const std::string& text, int nvars, bool alias = true) {
  std::vector<NcPolynomialD> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    raw = detail::trim(raw);
    if (raw.empty() || raw[0] == '#') continue;
    if (raw == "0") continue;
    if (raw.size() >= 2 && raw.front() == '(' && raw.back() == ')') raw = raw.substr(1, raw.size() - 2);
    ParseOptions opt;
    opt.nvars = nvars;
    opt.alias_xy = alias;
    opt.line = number;
    out.push_back(parse_polynomial(raw, opt).to_double());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

enum class Command { EigMin, TraceMin, PsdRank, SohsCheck, ExportSdpa };

inline Command parse_command(const std::string& s) {
  if (s == "eig-min") return Command::EigMin;
  if (s == "trace-min") return Command::TraceMin;
  if (s == "psd-rank") return Command::PsdRank;
  if (s == "sohs-check") return Command::SohsCheck;
  if (s == "export-sdpa") return Command::ExportSdpa;
  throw std::invalid_argument("unknown command '" + s + "'");
}

inline std::string to_string(Command c) {
  switch (c) {
    case Command::EigMin: return "eig-min";
    case Command::TraceMin: return "trace-min";
    case Command::PsdRank: return "psd-rank";
    case Command::SohsCheck: return "sohs-check";
    case Command::ExportSdpa: return "export-sdpa";
  }
  return "";
}

struct Request {
  Command command = Command::EigMin;
  std::optional<std::string> input;  // problem file, or CSV matrix for psd-rank
  std::optional<std::string> input_text;  // used instead of reading `input`
  std::optional<std::string> preset;      // "chsh" or "psdrank-example"
  std::optional<int> nvars;               // inline problem
  std::optional<std::string> objective;
  std::vector<std::string> inequalities;
  std::vector<std::string> equalities;
  std::optional<int> order;
  std::optional<Mode> kind;
  std::optional<double> tol_feas;
  std::optional<double> tol_gap;
  std::optional<int> max_iter;
  std::uint64_t seed = 0;
  int samples = 200;
  std::optional<std::string> export_sdpa;
};

struct Outcome {
  int exit_code = 0;
  json record;
  std::string sdpa;  // export-sdpa text when no path was given
};

namespace detail {

inline json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline int exit_code(sdp::Status s) {
  switch (s) {
    case sdp::Status::Optimal: return 0;
    case sdp::Status::PrimalInfeasible:
    case sdp::Status::DualInfeasible: return 2;
    default: return 1;
  }
}

using Clock = std::chrono::steady_clock;

inline double seconds(Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); }

inline json certificate_json(const HierarchyCertificate& c, const NcProblem& p, bool alias) {
  json j;
  j["lambda"] = c.lambda;
  j["residual_norm"] = c.residual_norm;
  j["sohs"] = json::array();
  for (const auto& g : c.sohs.summands) j["sohs"].push_back(to_string(g, alias));
  j["inequalities"] = json::array();
  for (std::size_t k = 0; k < c.inequalities.size(); ++k) {
    json w;
    w["g"] = to_string(p.inequalities[k], alias);
    w["weights"] = json::array();
    for (const auto& q : c.inequalities[k].weights) w["weights"].push_back(to_string(q, alias));
    j["inequalities"].push_back(std::move(w));
  }
  j["equalities"] = json::array();
  const int n = p.nvars();
  for (const auto& e : c.equalities) {
    if (std::abs(e.coefficient) < 1e-14) continue;
    j["equalities"].push_back({{"h", to_string(p.equalities[e.equality], alias)},
                               {"u", to_string(e.u, n, alias)},
                               {"v", to_string(e.v, n, alias)},
                               {"coefficient", e.coefficient}});
  }
  j["text"] = render_certificate(c.sohs, alias);
  return j;
}

inline json report_json(const BoundReport& r) {
  json j;
  j["kind"] = ncpop::to_string(r.kind);
  j["order"] = r.order;
  j["status"] = sdp::to_string(r.status);
  j["primal_status"] = r.primal_status;
  j["dual_status"] = r.dual_status;
  j["bounds"] = {{"primal", number(r.primal_bound)}, {"dual", number(r.dual_bound)}, {"sample", nullptr}};
  j["bound"] = number(r.bound());
  j["gap"] = number(r.gap);
  j["residuals"] = {{"primal_infeasibility", r.primal_infeasibility}, {"dual_infeasibility", r.dual_infeasibility}};
  j["iterations"] = r.iterations;
  j["objective_symmetrized"] = r.objective_symmetrized;
  j["sizes"] = {{"moment_classes", r.num_moment_classes}, {"free_variables", r.num_free_variables}, {"blocks", r.block_sizes}};
  j["certificate"] = nullptr;
  return j;
}

struct Loaded {
  NcProblem problem;
  bool alias = true;
  bool chsh = false;
  std::optional<double> tol_feas, tol_gap;
  std::optional<int> max_iter;
};

inline Loaded load_problem(const Request& req, Mode kind) {
  Loaded out;
  if (req.preset) {
    if (*req.preset != "chsh") throw std::invalid_argument("preset '" + *req.preset + "' does not apply to " + to_string(req.command));
    out.problem = chsh_problem(req.order.value_or(2));
    out.chsh = true;
    out.alias = false;
  } else if (req.objective) {
    if (req.input || req.input_text) throw std::invalid_argument("give either a problem file or --poly, not both");
    if (!req.nvars) throw std::invalid_argument("--poly needs --nvars");
    std::string text = "nvars " + std::to_string(*req.nvars) + "\nobjective " + *req.objective + "\n";
    for (const auto& g : req.inequalities) text += "ineq " + g + "\n";
    for (const auto& h : req.equalities) text += "eq " + h + "\n";
    out.problem = parse_problem(text).problem;
  } else {
    if (!req.input && !req.input_text) throw std::invalid_argument("no problem given (file, --poly or --preset)");
    const ProblemFile pf = parse_problem(req.input_text ? *req.input_text : read_file(*req.input));
    out.problem = pf.problem;
    out.tol_feas = pf.tol_feas;
    out.tol_gap = pf.tol_gap;
    out.max_iter = pf.max_iter;
  }
  out.problem.kind = kind;
  if (req.order) out.problem.order = req.order;
  return out;
}

inline sdp::SolverOptions solver_options(const Request& req, const Loaded* l) {
  sdp::SolverOptions o;
  if (l && l->tol_feas) o.feas_tol = *l->tol_feas;
  if (l && l->tol_gap) o.gap_tol = *l->tol_gap;
  if (l && l->max_iter) o.max_iter = *l->max_iter;
  if (req.tol_feas) o.feas_tol = *req.tol_feas;
  if (req.tol_gap) o.gap_tol = *req.tol_gap;
  if (req.max_iter) o.max_iter = *req.max_iter;
  if (o.feas_tol <= 0 || o.gap_tol <= 0) throw std::invalid_argument("tolerances must be positive");
  if (o.max_iter < 1) throw std::invalid_argument("max-iter must be positive");
  return o;
}

}  // namespace detail

/// Runs one command. Errors in the input are thrown; solver outcomes are
/// reported through the record and the exit code.
inline Outcome run(const Request& req) {
  using detail::Clock;
  const auto t0 = Clock::now();
  Outcome out;
  json& rec = out.record;
  rec["schema"] = 1;
  rec["command"] = to_string(req.command);
  json timings;

  auto finish_program = [&](const MomentProgram& prog, const HierarchyOptions& opt, const NcProblem* p, bool alias,
                            Clock::time_point built) {
    if (req.export_sdpa) detail::write_file(*req.export_sdpa, sdp::export_sdpa(prog.sdp));
    const BoundReport r = solve_program(prog, opt);
    const auto solved = Clock::now();
    json j = detail::report_json(r);
    for (auto it = j.begin(); it != j.end(); ++it) rec[it.key()] = it.value();
    // bound = (optimum of the exported SDP) + sdp_offset
    rec["sdp_offset"] = prog.offset;
    if (r.certificate && p) rec["certificate"] = detail::certificate_json(*r.certificate, *p, alias);
    timings["build_seconds"] = detail::seconds(t0, built);
    timings["solve_seconds"] = detail::seconds(built, solved);
    out.exit_code = detail::exit_code(r.status);
    return r;
  };

  switch (req.command) {
    case Command::EigMin:
    case Command::TraceMin: {
      const Mode kind = req.command == Command::EigMin ? Mode::Eigenvalue : Mode::Trace;
      if (req.kind && *req.kind != kind) throw std::invalid_argument("--kind conflicts with the command");
      const detail::Loaded l = detail::load_problem(req, kind);
      HierarchyOptions opt;
      opt.solver = detail::solver_options(req, &l);
      const MomentProgram prog = build_program(l.problem);
      const BoundReport r = finish_program(prog, opt, &l.problem, l.alias, Clock::now());
      if (req.samples > 0) {
        const auto ts = Clock::now();
        const SampleResult s =
            l.chsh ? sample_upper_bound(l.problem, {1, 2}, req.samples, req.seed, commuting_reflection_sampler(2))
                   : sample_upper_bound(l.problem, {1, 2, 3}, req.samples, req.seed);
        if (s.value) rec["bounds"]["sample"] = *s.value;
        rec["sampling"] = {{"trials", s.trials}, {"feasible", s.feasible}, {"seed", req.seed}};
        timings["sample_seconds"] = detail::seconds(ts, Clock::now());
      }
      if (l.chsh && r.finite()) rec["max_violation"] = -r.bound();
      break;
    }
    case Command::PsdRank: {
      if (req.kind && *req.kind != Mode::Trace) throw std::invalid_argument("psd-rank is a trace program");
      Eigen::MatrixXd M;
      if (req.preset) {
        if (*req.preset != "psdrank-example") throw std::invalid_argument("preset '" + *req.preset + "' does not apply to psd-rank");
        M = psd_rank_example_matrix();
      } else if (req.input_text) {
        M = parse_matrix_csv(*req.input_text);
      } else if (req.input) {
        M = parse_matrix_csv(detail::read_file(*req.input));
      } else {
        throw std::invalid_argument("psd-rank needs a CSV matrix file or --preset psdrank-example");
      }
      HierarchyOptions opt;
      opt.solver = detail::solver_options(req, nullptr);
      const MomentProgram prog = build_psd_rank_program(M, req.order.value_or(2));
      finish_program(prog, opt, nullptr, false, Clock::now());
      json rows = json::array();
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
      }
      rec["matrix"] = std::move(rows);
      break;
    }
    case Command::SohsCheck: {
      if (req.kind && *req.kind != Mode::Eigenvalue) throw std::invalid_argument("sohs-check works in eigenvalue mode");
      const detail::Loaded l = detail::load_problem(req, Mode::Eigenvalue);
      if (!l.problem.inequalities.empty() || !l.problem.equalities.empty())
        throw std::invalid_argument("sohs-check takes an objective only");
      const NcPolynomial& f = l.problem.objective;
      const int d = l.problem.order.value_or(f.half_degree().value_or(0));
      rec["order"] = d;
      rec["certificate"] = nullptr;
      if (!f.is_symmetric()) {
        rec["status"] = "infeasible";
        rec["feasible"] = false;
        rec["message"] = "f is not symmetric, so it is not a sum of hermitian squares";
        out.exit_code = 2;
        break;
      }
      const GramSystem sys = build_gram_system(f, d, Mode::Eigenvalue);
      GramFace face = gram_face(sys);
      const sdp::SdpProblem P = to_sdp(sys, face);
      // Nothing left to solve when no constraint survives on the face.
      const bool trivial = face.infeasible || face.kept.empty() || P.num_constraints() == 0;
      if (req.export_sdpa) detail::write_file(*req.export_sdpa, sdp::export_sdpa(trivial ? to_sdp(sys) : P));
      const auto built = Clock::now();
      sdp::SdpSolution sol;
      if (trivial) {
        sol.status = face.infeasible ? sdp::Status::PrimalInfeasible : sdp::Status::Optimal;
        const auto k = static_cast<Eigen::Index>(face.kept.size());
        sol.X = {Eigen::MatrixXd::Zero(k, k)};
        if (face.infeasible) sol.message = "a coefficient of f cannot be matched on the face of psd Gram matrices";
      } else {
        sol = sdp::solve(P, detail::solver_options(req, &l));
      }
      timings["build_seconds"] = detail::seconds(t0, built);
      timings["solve_seconds"] = detail::seconds(built, Clock::now());
      const bool feasible = sol.status == sdp::Status::Optimal;
      rec["status"] = feasible ? "feasible" : sol.status == sdp::Status::PrimalInfeasible ? "infeasible" : sdp::to_string(sol.status);
      rec["solver_status"] = sdp::to_string(sol.status);
      rec["feasible"] = feasible;
      rec["iterations"] = sol.iterations;
      rec["residuals"] = {{"primal_infeasibility", sol.primal_infeasibility}, {"dual_infeasibility", sol.dual_infeasibility}};
      rec["sizes"] = {{"gram_size", sys.basis.size()}, {"face_size", face.kept.size()}, {"constraints", sys.constraints.size()}};
      if (feasible) {
        const SohsCertificate cert = extract_sohs(face.expand(sol.X[0]), sys.basis, 1e-8, sys.target.to_double());
        json c;
        c["residual_norm"] = cert.residual_norm;
        c["sohs"] = json::array();
        for (const auto& g : cert.summands) c["sohs"].push_back(to_string(g));
        c["text"] = render_certificate(cert);
        rec["certificate"] = std::move(c);
      }
      out.exit_code = feasible ? 0 : sol.status == sdp::Status::PrimalInfeasible ? 2 : 1;
      break;
    }
    case Command::ExportSdpa: {
      const detail::Loaded l = detail::load_problem(req, req.kind.value_or(Mode::Eigenvalue));
      const MomentProgram prog = build_program(l.problem);
      out.sdpa = sdp::export_sdpa(prog.sdp);
      if (req.export_sdpa) detail::write_file(*req.export_sdpa, out.sdpa);
      rec["kind"] = ncpop::to_string(l.problem.kind);
      rec["order"] = prog.order;
      rec["status"] = "exported";
      rec["offset"] = prog.offset;
      rec["sizes"] = {{"constraints", prog.sdp.num_constraints()}, {"blocks", prog.sdp.blocks}};
      break;
    }
  }
  timings["total_seconds"] = detail::seconds(t0, Clock::now());
  rec["timings"] = std::move(timings);
  return out;
}

/// JSON text with the timing fields removed, for determinism checks.
inline std::string without_timings(json record) {
  record.erase("timings");
  return record.dump(2);
}

}  // namespace ncpop::cli

#endif  // NCPOP_CLI_HPP
