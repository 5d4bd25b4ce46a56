#ifndef NCPOP_MODE_HPP
#define NCPOP_MODE_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncpop {

/// Eigenvalue programs identify w with w*; trace programs identify whole
/// cyclic classes (rotations of w and of w*).
enum class Mode { Eigenvalue, Trace };

inline const char* to_string(Mode m) { return m == Mode::Eigenvalue ? "eigenvalue" : "trace"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "eigenvalue" || s == "eig") return Mode::Eigenvalue;
  if (s == "trace") return Mode::Trace;
  throw std::invalid_argument("unknown kind '" + std::string(s) + "' (expected eigenvalue or trace)");
}

}  // namespace ncpop

#endif  // NCPOP_MODE_HPP
