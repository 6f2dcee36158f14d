#pragma once

// Shared domain types: parameter spaces, utility forms, feasible regions,
// per-step instances, observations, and the decomposition map c(.) that pairs
// with the parameter vector in the agent objective
//
//   f(x; theta, u) = f1(x; u) + <theta, c(x)>.
//
// All built-in forms use an empty theta-only term and p = n.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "preflearn/linalg.hpp"

namespace preflearn {

// ---------------------------------------------------------------------------
// Parameter space and points
// ---------------------------------------------------------------------------

enum class SpaceKind { Simplex, Box };

struct ParameterSpace {
  SpaceKind kind = SpaceKind::Simplex;
  int dim = 0;
  double lo = 0.0, hi = 1.0;  // box bounds; unused for the simplex

  static ParameterSpace simplex(int dim);
  static ParameterSpace box(int dim, double lo, double hi);

  bool contains(const Vec& v, double tol = 1e-9) const;
};

/// A candidate parameter vector; the constructor enforces the space
/// invariants (simplex: nonnegative, unit l1 within 1e-9; box: within bounds).
struct ParameterPoint {
  Vec values;
  ParameterSpace space;

  ParameterPoint() = default;
  ParameterPoint(Vec v, ParameterSpace s);

  int dim() const { return static_cast<int>(values.size()); }
};

ParameterPoint uniform_simplex_point(int dim);

// ---------------------------------------------------------------------------
// Utility forms
// ---------------------------------------------------------------------------

enum class UtilityKind { QuadDiag, CesRho2, Bilinear, CobbDouglas, Custom1d };

// The 1-d (c, f1) pairs are enumerated built-ins, not user-scriptable code,
// so their regression behaviour is deterministic.
enum class Custom1dKind {
  IndicatorAtZero,  // f1(x) = x,  c(x) = -1 if x == 0 else 0
  LinearCost,       // f1(x) = 0,  c(x) = x
};

struct UtilityForm {
  UtilityKind kind = UtilityKind::QuadDiag;
  Vec quad_diag;  // strictly positive diagonal of P (QuadDiag only)
  Custom1dKind custom = Custom1dKind::IndicatorAtZero;

  static UtilityForm quad(Vec diag);
  static UtilityForm ces();
  static UtilityForm bilinear();
  static UtilityForm cobb_douglas();
  static UtilityForm custom_1d(Custom1dKind kind);
};

// ---------------------------------------------------------------------------
// Feasible regions
// ---------------------------------------------------------------------------

enum class DomainKind { ContKnapsack, Polytope, BinKnapsack, EqKnapsack, Interval };

struct Domain {
  DomainKind kind = DomainKind::ContKnapsack;
  Vec prices;          // knapsack variants: positive price vector
  double budget = 0.0;
  int m = 0;           // polytope: number of rows
  Vec A;               // polytope: row-major m x n, nonnegative
  Vec rhs;             // polytope: positive m-vector
  double lo = 0.0, hi = 0.0;  // interval bounds

  static Domain cont_knapsack(Vec prices, double budget);
  static Domain polytope(int m, int n, Vec A, Vec rhs);
  static Domain bin_knapsack(Vec prices, double budget);
  static Domain eq_knapsack(Vec prices, double budget);
  static Domain interval(double lo, double hi);

  int dim() const;
  bool feasible(const Vec& x, double tol = 1e-8) const;

  /// Per-coordinate upper bound on x_i over the domain. Knapsack: b / p_i;
  /// polytope: min_j rhs_j / A_ji over rows with A_ji > 0.
  Vec coordinate_bounds() const;
};

/// One time step of the forward problem: the external signal is the domain
/// parameters of the step.
struct Instance {
  int t = 0;
  UtilityForm utility;
  Domain domain;
  int n = 0;
};

Instance make_instance(int t, UtilityForm utility, Domain domain);

enum class NoiseMode { Perfect, UniformSmall, UniformLarge, SuboptimalFeasible };

struct Observation {
  Vec y;
  NoiseMode mode = NoiseMode::Perfect;
};

// ---------------------------------------------------------------------------
// Objective evaluation
// ---------------------------------------------------------------------------

/// Floor applied to x coordinates before log terms when evaluating
/// Cobb-Douglas objectives on possibly-noisy points.
inline constexpr double kCobbDouglasFloor = 1e-12;

/// The vector paired with theta in f. Per form: quad/bilinear c(x) = -x,
/// CES c_i = x_i^2, Cobb-Douglas c_i = -log x_i (throws std::domain_error for
/// non-positive coordinates), custom-1d as enumerated.
Vec c_map(const Vec& x, const UtilityForm& u);

/// Theta-free part of the objective: 1/2 x'Px for quad, x for the 1-d
/// indicator pair, zero otherwise.
double f1_value(const Vec& x, const UtilityForm& u);

/// f(x; theta, u) = f1(x) + <theta, c(x)>. The agent minimizes f. For
/// Cobb-Douglas, x is clamped to kCobbDouglasFloor before evaluation.
double eval_f(const Vec& x, const Vec& theta, const Instance& inst);

/// Copy of x with Cobb-Douglas coordinates clamped to at least `floor`;
/// other forms are returned unchanged.
Vec clamp_for_utility(const Vec& x, const UtilityForm& u,
                      double floor = kCobbDouglasFloor);

// ---------------------------------------------------------------------------
// Stream serialization (line-oriented plain text, replayable)
// ---------------------------------------------------------------------------
//
// Format, one record per line, whitespace separated, doubles at %.17g:
//   prefstream 1
//   meta utility <kind> n <n> space <simplex | box <lo> <hi>>
//   theta_true <n values>
//   quad_diag <n values>                    (QuadDiag streams only)
//   step <t> ck <n> <p_1..p_n> <b>
//   step <t> cp <n> <m> <A row-major, m*n values> <rhs_1..rhs_m>
//   step <t> bk <n> <p_1..p_n> <b>
//   step <t> eck <n> <p_1..p_n> <b>
//   step <t> interval <lo> <hi> <indicator-at-zero | linear-cost>

struct InstanceStream {
  ParameterPoint theta_true;
  Vec quad_diag;  // nonempty only for QuadDiag streams
  std::vector<Instance> steps;
};

void write_stream(std::ostream& os, const InstanceStream& s);
InstanceStream read_stream(std::istream& is);

std::string to_string(UtilityKind k);
std::string to_string(DomainKind k);
std::string to_string(NoiseMode m);
UtilityKind utility_kind_from_string(const std::string& s);
DomainKind domain_kind_from_string(const std::string& s);
NoiseMode noise_mode_from_string(const std::string& s);

}  // namespace preflearn
