#pragma once

// Proximal setups and the simple-loss learners: online mirror descent with a
// first-order oracle and the implicit update with its closed-form solution
// oracle (Euclidean geometry on the simplex).

#include "preflearn/types.hpp"

namespace preflearn {

enum class Geometry { EntropySimplex, EuclidSimplex, EuclidBox };

/// Interiority floor applied to entropy-geometry iterates (clamp, then
/// renormalize) so the d.g.f. subgradient exists at the next prox center.
inline constexpr double kEntropyFloor = 1e-12;

struct ProxSetup {
  Geometry geometry = Geometry::EntropySimplex;
  ParameterSpace space;
  double omega = 0.0;      // set width from the omega-center
  double omega_hat = 0.0;  // max Bregman distance between any two points
  double G = 0.0;          // subgradient / Lipschitz bound
};

/// Fills the set widths for the geometry: entropy-simplex omega = ln n,
/// euclid-simplex omega = (1 - 1/n)/2 and omega_hat = 1, euclid-box
/// omega = p w^2 / 8 and omega_hat = p w^2 / 2 with w = hi - lo.
ProxSetup make_prox_setup(Geometry g, const ParameterSpace& space, double G);

enum class ScheduleKind { MdConstantPaper, MdConstantOptimal, ImplicitSqrt, Custom };

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::MdConstantOptimal;
  double omega = 0.0, omega_hat = 0.0, G = 0.0;
  int T = 0;
  Vec custom;

  static StepSchedule md_constant_paper(double omega, double G, int T);
  static StepSchedule md_constant_optimal(double omega, double G, int T);
  static StepSchedule implicit_sqrt(double omega_hat, double G);
  static StepSchedule custom_steps(Vec eta);
};

/// eta_t for t >= 1. Constant kinds ignore t; custom is a table lookup.
double step_value(const StepSchedule& schedule, int t);

/// Euclidean projection onto the unit simplex (sort-and-threshold).
ParameterPoint project_simplex(const Vec& v);

/// Prox_theta(xi): entropy-simplex uses the multiplicative formula,
/// Euclidean geometries project theta - xi onto the space.
ParameterPoint prox_map(const ParameterPoint& theta, const Vec& xi,
                        const ProxSetup& setup);

/// Mirror-descent update theta_{t+1} = Prox_theta(eta_t s_t).
ParameterPoint md_step(const ParameterPoint& theta, const Vec& s, int t,
                       const StepSchedule& schedule, const ProxSetup& setup);

/// Implicit update for the linear simple loss with Euclidean d.g.f.:
/// exact minimizer of 1/2 ||th - theta||^2 + eta_t <th, s> over the simplex.
ParameterPoint implicit_sim_step(const ParameterPoint& theta, const Vec& s, int t,
                                 const StepSchedule& schedule);

}  // namespace preflearn
