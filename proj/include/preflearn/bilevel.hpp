#pragma once

// Implicit update for the prediction loss, solved as a single-level program:
// the inner quadratic program is replaced by its KKT conditions and the
// complementarity pairs are resolved by best-first branch-and-bound. Each
// fully resolved pattern leaves an equality-constrained convex QP solved by a
// dense linear solve. The 1-d enumerated utilities go through an exact
// piecewise case analysis instead.

#include <cstdint>

#include "preflearn/types.hpp"

namespace preflearn {

struct KktPoint {
  Vec x;  // inner primal
  Vec w;  // multipliers of x >= 0
  Vec v;  // multipliers of Ax <= rhs
  std::vector<std::uint8_t> active_x;  // x_i pinned to zero
  std::vector<std::uint8_t> active_g;  // row j binding
};

struct PatternCandidate {
  bool feasible = false;
  Vec theta, x, w, v;
  double objective = 0.0;
};

struct PreStepOptions {
  int n_cap = 15;       // refuse larger instances (pattern space is 2^(n+m))
  double tol = 1e-9;    // sign / feasibility tolerance for candidates
};

struct PreStepResult {
  ParameterPoint theta_next;
  KktPoint kkt;
  double objective = 0.0;
  long nodes_explored = 0;
  long patterns_solved = 0;
};

/// Solves the fixed-pattern subproblem: minimize
///   1/2 ||theta - theta_t||^2 + eta ||y - x||^2
/// subject to the inner stationarity P x - theta + A'v - w = 0, the pattern's
/// pinned coordinates / binding rows, and theta on the simplex (theta >= 0 is
/// handled by an active-set refinement inside the solve). Sign or primal
/// feasibility failures, and singular systems, return an infeasible marker.
PatternCandidate kkt_pattern_solve(const std::vector<std::uint8_t>& active_x,
                                   const std::vector<std::uint8_t>& active_g,
                                   const ParameterPoint& theta_t, double eta,
                                   const Vec& quad_diag, const Domain& dom,
                                   const Vec& y, double tol = 1e-9);

/// Globally pattern-optimal implicit update for the prediction loss on quad
/// utilities over continuous knapsack/polytope domains (branch-and-bound), or
/// the exact 1-d case analysis on interval instances. The candidate theta_t
/// is always evaluated, so the result never has a higher bilevel objective
/// than staying put.
PreStepResult implicit_pre_step(const ParameterPoint& theta_t, double eta,
                                const Instance& inst, const Vec& y,
                                const PreStepOptions& opts = {});

/// Test oracle: enumerate every complementarity pattern, solve each, take the
/// best under the same order-independent tie rule as the branch-and-bound.
PreStepResult implicit_pre_exhaustive(const ParameterPoint& theta_t, double eta,
                                      const Instance& inst, const Vec& y,
                                      const PreStepOptions& opts = {});

}  // namespace preflearn
