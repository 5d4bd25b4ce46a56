#ifndef NCPOP_NCPOP_HPP
#define NCPOP_NCPOP_HPP

#include "ncpop/rational.hpp"
#include "ncpop/word.hpp"
#include "ncpop/basis.hpp"
#include "ncpop/polynomial.hpp"
#include "ncpop/mode.hpp"
#include "ncpop/parse.hpp"
#include "ncpop/evaluate.hpp"
#include "ncpop/elimination.hpp"
#include "ncpop/gram.hpp"
#include "ncpop/moment.hpp"
#include "ncpop/sdp/problem.hpp"
#include "ncpop/sdp/solver.hpp"
#include "ncpop/sdp/sdpa.hpp"
#include "ncpop/hierarchy.hpp"
#include "ncpop/cli.hpp"

#endif  // NCPOP_NCPOP_HPP
