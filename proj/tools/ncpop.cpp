// ncpop: eigenvalue and trace minimization of nc polynomials from the command line.
//
//   ncpop trace-min --order 2 problem.txt
//   ncpop eig-min --preset chsh --order 2
//   ncpop psd-rank --order 2 matrix.csv
//   ncpop sohs-check --nvars 2 --poly "1+2*x+x^2+x*y^2+2*y^2+y^2*x+y*x^2*y+y^4"
//   ncpop export-sdpa --kind trace --out t.dat-s problem.txt

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "ncpop/cli.hpp"

namespace {

void summary(const nlohmann::json& r) {
  std::cerr << r.value("command", "") << ": " << r.value("status", "");
  if (r.contains("bound")) std::cerr << ", bound " << r["bound"].dump();
  if (r.contains("gap")) std::cerr << ", gap " << r["gap"].dump();
  if (r.contains("timings")) std::cerr << ", " << r["timings"].value("total_seconds", 0.0) << " s";
  std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noncommutative polynomial optimization via SOHS relaxations"};
  app.require_subcommand(1);
  ncpop::cli::Request req;
  std::string out_path;
  bool quiet = false;
  std::string kind_text;

  auto add_common = [&](CLI::App* sub, bool problem_input) {
    sub->add_option("input", req.input, problem_input ? "Problem file" : "CSV matrix file");
    sub->add_option("-d,--order", req.order, "Relaxation order d")->check(CLI::NonNegativeNumber);
    sub->add_option("--kind", kind_text, "eigenvalue or trace");
    sub->add_option("--tol-feas", req.tol_feas, "Feasibility tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--tol-gap", req.tol_gap, "Relative duality gap tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", req.max_iter, "Interior point iteration limit")->check(CLI::PositiveNumber);
    sub->add_option("--seed", req.seed, "Seed for the sampling upper bound");
    sub->add_option("--out", out_path, "Write the result here instead of stdout");
    sub->add_option("--export-sdpa", req.export_sdpa, "Also write the SDP in SDPA sparse format");
    sub->add_option("--preset", req.preset, "chsh or psdrank-example")
        ->check(CLI::IsMember({"chsh", "psdrank-example"}));
    sub->add_flag("-q,--quiet", quiet, "No summary on stderr");
    if (problem_input) {
      sub->add_option("--nvars", req.nvars, "Number of letters for --poly")->check(CLI::PositiveNumber);
      sub->add_option("--poly", req.objective, "Objective given inline");
      sub->add_option("--ineq", req.inequalities, "Inline inequality g >= 0 (repeatable)");
      sub->add_option("--eq", req.equalities, "Inline equality h = 0 (repeatable)");
      sub->add_option("--samples", req.samples, "Random trials for the sampled upper bound (0 disables)")
          ->check(CLI::NonNegativeNumber);
    }
  };
  struct Sub {
    const char* name;
    const char* help;
    ncpop::cli::Command command;
    bool problem_input;
  };
  const Sub subs[] = {
      {"eig-min", "Lower bound on the smallest eigenvalue", ncpop::cli::Command::EigMin, true},
      {"trace-min", "Lower bound on the smallest normalized trace", ncpop::cli::Command::TraceMin, true},
      {"psd-rank", "Lower bound on the psd rank of a nonnegative matrix", ncpop::cli::Command::PsdRank, false},
      {"sohs-check", "Decide whether f is a sum of hermitian squares", ncpop::cli::Command::SohsCheck, true},
      {"export-sdpa", "Write the relaxation in SDPA sparse format", ncpop::cli::Command::ExportSdpa, true},
  };
  std::vector<std::pair<CLI::App*, ncpop::cli::Command>> registered;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, s.problem_input);
    registered.emplace_back(sub, s.command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (const auto& [sub, cmd] : registered)
    if (sub->parsed()) req.command = cmd;

  try {
    if (!kind_text.empty()) req.kind = ncpop::parse_mode(kind_text);
    if (req.command == ncpop::cli::Command::ExportSdpa) {
      ncpop::cli::Outcome o = ncpop::cli::run(req);
      if (!req.export_sdpa) {
        if (out_path.empty()) std::cout << o.sdpa;
        else ncpop::cli::detail::write_file(out_path, o.sdpa);
      }
      if (!quiet) summary(o.record);
      return o.exit_code;
    }
    ncpop::cli::Outcome o = ncpop::cli::run(req);
    const std::string text = o.record.dump(2) + "\n";
    if (out_path.empty()) std::cout << text;
    else ncpop::cli::detail::write_file(out_path, text);
    if (!quiet) summary(o.record);
    return o.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
