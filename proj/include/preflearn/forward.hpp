#pragma once

// Forward-problem solvers: compute x(theta; u) = argmin f over the step's
// domain for every supported (utility, domain) pair, plus a brute-force
// oracle used by the tests. Alternate optima are resolved by smaller
// Euclidean norm, then lexicographically.

#include "preflearn/types.hpp"

namespace preflearn {

enum class SolveStatus { Optimal, MaxIter, Infeasible };

struct ForwardSolution {
  Vec x;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
  double tie_break_norm = 0.0;
};

struct QpOptions {
  double feas_tol = 1e-8;
  double kkt_tol = 1e-7;
  int max_iter = 50000;
};

/// Guard for closed forms that divide by theta_i; simplex iterates may touch
/// zero and are floored to this value before the division.
inline constexpr double kThetaFloor = 1e-9;

/// Quadratic utility over a continuous knapsack or polytope. Knapsack path:
/// clip the unconstrained point and bisect on the budget multiplier.
/// Polytope path: accelerated projected gradient with a Dykstra-style
/// projection onto {x >= 0, Ax <= rhs}.
ForwardSolution solve_quad_continuous(const ParameterPoint& theta, const Domain& dom,
                                      const Vec& quad_diag, const QpOptions& opts = {});

/// Exact 0/1 knapsack via dynamic programming over the integer budget.
/// Prices must be integers (the generator rounds them for binary domains).
ForwardSolution solve_binary_knapsack(const ParameterPoint& theta, const Domain& dom,
                                      const Vec& quad_diag);

/// CES (rho = 2) over an equality-constrained knapsack, closed form
/// x_i = lambda p_i / (2 theta_i) with lambda = 2b / sum_j p_j^2 / theta_j.
ForwardSolution solve_ces_eq_knapsack(const ParameterPoint& theta, const Domain& dom);

/// Linear utility maximization over a knapsack: whole budget on the best
/// theta_i / p_i ratio, ties to the smallest index, all-zero theta gives 0.
ForwardSolution solve_bilinear_knapsack(const ParameterPoint& theta, const Domain& dom);

/// Cobb-Douglas over a knapsack, closed form x_i = theta_i b / p_i.
ForwardSolution solve_cobb_douglas_knapsack(const ParameterPoint& theta,
                                            const Domain& dom);

/// Exact case analysis for the enumerated 1-d utility pairs on an interval.
ForwardSolution solve_custom_1d(double theta, const Instance& inst);

/// Dispatch on (utility, domain); throws std::invalid_argument for
/// unsupported combinations.
ForwardSolution solve_forward(const ParameterPoint& theta, const Instance& inst,
                              const QpOptions& opts = {});

/// Test oracle: exhaustive grid / vertex / subset enumeration. Continuous
/// grids run at the given relative resolution with one local refinement pass;
/// refuses n > 3 for grids and n > 15 for binary enumeration.
ForwardSolution brute_force_forward(const ParameterPoint& theta, const Instance& inst,
                                    double resolution);

}  // namespace preflearn
