#ifndef NCPOP_SDP_SDPA_HPP
#define NCPOP_SDP_SDPA_HPP

#include <cerrno>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncpop/rational.hpp"
#include "ncpop/sdp/problem.hpp"

namespace ncpop::sdp {

class SdpaError : public std::runtime_error {
 public:
  SdpaError(const std::string& msg, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

/// 17 significant digits, with a trailing `.0` on integral values.
inline std::string sdpa_number(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace detail

/// SDPA sparse text (.dat-s). C is written as F0 and A_j as F_j, so the SDPA
/// dual "maximize <F0, Y> s.t. <F_j, Y> = c_j" is exactly our primal.
inline std::string export_sdpa(const SdpProblem& problem) {
  const SdpProblem p = problem.materialized();
  p.validate();
  if (p.num_constraints() < 1) throw std::invalid_argument("export_sdpa: the format requires at least one constraint");
  std::ostringstream os;
  os << p.num_constraints() << "\n" << p.blocks.size() << "\n";
  for (std::size_t k = 0; k < p.blocks.size(); ++k) os << (k ? " " : "") << p.blocks[k];
  os << "\n";
  for (Eigen::Index j = 0; j < p.b.size(); ++j) os << (j ? " " : "") << detail::sdpa_number(p.b[j]);
  os << "\n";
  auto write = [&](int matno, BlockMatrix m) {
    m.normalize();
    for (const auto& e : m.entries())
      os << matno << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << detail::sdpa_number(e.value)
         << "\n";
  };
  write(0, p.C);
  for (std::size_t j = 0; j < p.A.size(); ++j) write(static_cast<int>(j) + 1, p.A[j]);
  return os.str();
}

inline SdpProblem import_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  // Header values may be decorated with SDPA's optional punctuation.
  auto clean = [](std::string s) {
    for (char& c : s)
      if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
    return s;
  };
  auto parse_double = [&](const std::string& tok) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE) throw SdpaError("malformed number '" + tok + "'", line_no);
    return v;
  };
  auto parse_int = [&](const std::string& tok) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0') throw SdpaError("malformed integer '" + tok + "'", line_no);
    return static_cast<int>(v);
  };

  bool header_done = false;
  int stage = 0;
  int k = 0, nblocks = 0;
  SdpProblem p;
  std::vector<std::string> pending;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (!header_done && stage == 0 && !raw.empty() && (raw[0] == '"' || raw[0] == '*')) continue;
    std::istringstream ls(stage < 4 ? clean(raw) : raw);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (stage < 4 && toks.empty()) continue;
    if (stage == 0) {
      k = parse_int(toks[0]);
      if (k < 1) throw SdpaError("number of constraints must be positive", line_no);
      stage = 1;
    } else if (stage == 1) {
      nblocks = parse_int(toks[0]);
      if (nblocks < 1) throw SdpaError("number of blocks must be positive", line_no);
      stage = 2;
    } else if (stage == 2) {
      pending.insert(pending.end(), toks.begin(), toks.end());
      if (static_cast<int>(pending.size()) >= nblocks) {
        if (static_cast<int>(pending.size()) > nblocks) throw SdpaError("too many block sizes", line_no);
        for (const auto& t : pending) {
          const int s = parse_int(t);
          if (s == 0) throw SdpaError("zero block size", line_no);
          p.blocks.push_back(s);
        }
        pending.clear();
        stage = 3;
      }
    } else if (stage == 3) {
      pending.insert(pending.end(), toks.begin(), toks.end());
      if (static_cast<int>(pending.size()) >= k) {
        if (static_cast<int>(pending.size()) > k) throw SdpaError("too many entries in b", line_no);
        p.b.resize(k);
        for (int j = 0; j < k; ++j) p.b[j] = parse_double(pending[static_cast<std::size_t>(j)]);
        pending.clear();
        p.A.resize(static_cast<std::size_t>(k));
        stage = 4;
        header_done = true;
      }
    } else {
      if (toks.empty() || toks[0][0] == '"' || toks[0][0] == '*') continue;
      if (toks.size() != 5) throw SdpaError("entry line needs 5 fields 'matno blkno i j value'", line_no);
      const int mat = parse_int(toks[0]);
      const int blk = parse_int(toks[1]);
      int i = parse_int(toks[2]);
      int j = parse_int(toks[3]);
      const double v = parse_double(toks[4]);
      if (mat < 0 || mat > k) throw SdpaError("matrix number out of range", line_no);
      if (blk < 1 || blk > nblocks) throw SdpaError("block number out of range", line_no);
      const int dim = std::abs(p.blocks[static_cast<std::size_t>(blk - 1)]);
      if (i < 1 || j < 1 || i > dim || j > dim) throw SdpaError("entry index out of range", line_no);
      if (p.blocks[static_cast<std::size_t>(blk - 1)] < 0 && i != j)
        throw SdpaError("off-diagonal entry in a diagonal block", line_no);
      BlockMatrix& m = mat == 0 ? p.C : p.A[static_cast<std::size_t>(mat - 1)];
      m.add(blk - 1, i - 1, j - 1, v);
    }
  }
  if (stage < 4) throw SdpaError("unexpected end of input in header", line_no);
  p.C.normalize();
  for (auto& a : p.A) a.normalize();
  return p;
}

}  // namespace ncpop::sdp

#endif  // NCPOP_SDP_SDPA_HPP
