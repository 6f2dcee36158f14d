#pragma once

// The four loss functions and regret accounting. Quantities that touch
// theta_true (the simple-loss constant, the estimate loss) live in the
// evaluator; the learner consumes only the subgradient s_t, which is
// computable from revealed information.

#include "preflearn/forward.hpp"
#include "preflearn/types.hpp"

namespace preflearn {

struct LossRecord {
  int t = 0;
  double l_pre = 0.0;  // ||y - x(theta_t; u_t)||^2
  double l_sub = 0.0;  // f(y; theta_t) - f(x(theta_t); theta_t)
  double l_est = 0.0;  // f(x(theta_t); theta_true) - f(y; theta_true)
  double l_sim = 0.0;  // <theta_t - theta_true, c(y) - c(x(theta_t))>
  Vec s;               // c(y) - c(x(theta_t; u_t)), the simple-loss gradient
  Vec x_pred;
  Vec y;
};

/// Constant gradient of the linear simple loss; carries no theta_true
/// information.
Vec sim_subgradient(const Vec& x_pred, const Vec& y, const UtilityForm& u);

/// Evaluates all four losses of step t at theta = theta_t.
LossRecord eval_losses(const ParameterPoint& theta_t, const Instance& inst,
                       const Observation& obs, const ParameterPoint& theta_true,
                       const QpOptions& opts = {});

/// Same, reusing a prediction already computed by the caller.
LossRecord eval_losses_with_pred(const ParameterPoint& theta_t, const Instance& inst,
                                 const Observation& obs,
                                 const ParameterPoint& theta_true,
                                 const ForwardSolution& pred);

/// Loss values of step t at an arbitrary theta (the prediction x(theta_t)
/// entering the simple loss stays fixed at the step's iterate).
struct LossesAt {
  double l_pre = 0.0, l_sub = 0.0, l_est = 0.0, l_sim = 0.0;
};
LossesAt eval_losses_at(const ParameterPoint& theta, const ParameterPoint& theta_t,
                        const Instance& inst, const Observation& obs,
                        const ParameterPoint& theta_true, const QpOptions& opts = {});

enum class LossKind { Pre, Sub, Est, Sim };
enum class InfoMode { Perfect, Noisy };

/// Offline minimum of the cumulative loss over the parameter space.
/// Perfect mode: 0 for pre/sub/est (attained at theta_true). The simple loss
/// is linear, so its minimum is a vertex (simplex) or coordinate-wise (box)
/// expression of sum_t s_t. Noisy pre/sub/est minima are bilevel problems and
/// raise std::runtime_error.
double offline_min(LossKind kind, const std::vector<LossRecord>& history,
                   const ParameterSpace& space, const ParameterPoint& theta_true,
                   InfoMode mode);

/// Prefix offline minima (entry t-1 covers steps 1..t). Unavailable series
/// are NaN in noisy mode.
struct OfflineMinima {
  Vec pre, sub, est, sim;
};
OfflineMinima compute_offline_minima(const std::vector<LossRecord>& records,
                                     const ParameterSpace& space,
                                     const ParameterPoint& theta_true, InfoMode mode);

/// Per-step cumulative losses, prefix offline minima, running average regrets
/// (cumsum - offline_min)/t, and per-step learner wall clock.
struct RegretTrace {
  Vec cum_pre, cum_sub, cum_est, cum_sim;
  Vec off_pre, off_sub, off_est, off_sim;
  Vec avg_regret_pre, avg_regret_sub, avg_regret_est, avg_regret_sim;
  Vec step_ms;
};

RegretTrace build_regret_trace(const std::vector<LossRecord>& records,
                               const OfflineMinima& offline);

/// Regret relations at the final step of a perfect-information trace:
/// R_sim >= R_sub + R_est >= 0 and R_sub + R_est = sum l_sim, within tol.
/// Returns an empty string when they hold, else a diagnostic.
std::string check_regret_relations(const RegretTrace& trace, double tol = 1e-6);

}  // namespace preflearn
