#include "preflearn/losses.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace preflearn {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double sim_min_over_space(const Vec& grad_sum, const ParameterSpace& space,
                          const Vec& theta_true) {
  // min over the space of <theta - theta_true, S>
  if (space.kind == SpaceKind::Simplex) {
    double min_coord = grad_sum[0];
    for (double g : grad_sum) min_coord = std::min(min_coord, g);
    return min_coord - dot(theta_true, grad_sum);
  }
  double v = 0.0;
  for (std::size_t i = 0; i < grad_sum.size(); ++i) {
    const double best = grad_sum[i] >= 0.0 ? space.lo : space.hi;
    v += (best - theta_true[i]) * grad_sum[i];
  }
  return v;
}
}  // namespace

Vec sim_subgradient(const Vec& x_pred, const Vec& y, const UtilityForm& u) {
  return sub(c_map(clamp_for_utility(y, u), u), c_map(clamp_for_utility(x_pred, u), u));
}

LossRecord eval_losses_with_pred(const ParameterPoint& theta_t, const Instance& inst,
                                 const Observation& obs,
                                 const ParameterPoint& theta_true,
                                 const ForwardSolution& pred) {
  if (pred.status != SolveStatus::Optimal)
    throw std::runtime_error("forward solve failed while evaluating losses");
  LossRecord rec;
  rec.t = inst.t;
  rec.x_pred = pred.x;
  rec.y = obs.y;
  rec.l_pre = l2_dist_sq(obs.y, pred.x);
  rec.l_sub = eval_f(obs.y, theta_t.values, inst) - eval_f(pred.x, theta_t.values, inst);
  rec.l_est =
      eval_f(pred.x, theta_true.values, inst) - eval_f(obs.y, theta_true.values, inst);
  rec.s = sim_subgradient(pred.x, obs.y, inst.utility);
  rec.l_sim = dot(sub(theta_t.values, theta_true.values), rec.s);
  return rec;
}

LossRecord eval_losses(const ParameterPoint& theta_t, const Instance& inst,
                       const Observation& obs, const ParameterPoint& theta_true,
                       const QpOptions& opts) {
  return eval_losses_with_pred(theta_t, inst, obs, theta_true,
                               solve_forward(theta_t, inst, opts));
}

LossesAt eval_losses_at(const ParameterPoint& theta, const ParameterPoint& theta_t,
                        const Instance& inst, const Observation& obs,
                        const ParameterPoint& theta_true, const QpOptions& opts) {
  const ForwardSolution at_theta = solve_forward(theta, inst, opts);
  const ForwardSolution at_iterate = solve_forward(theta_t, inst, opts);
  if (at_theta.status != SolveStatus::Optimal || at_iterate.status != SolveStatus::Optimal)
    throw std::runtime_error("forward solve failed while evaluating losses");

  LossesAt out;
  out.l_pre = l2_dist_sq(obs.y, at_theta.x);
  out.l_sub =
      eval_f(obs.y, theta.values, inst) - eval_f(at_theta.x, theta.values, inst);
  out.l_est = eval_f(at_theta.x, theta_true.values, inst) -
              eval_f(obs.y, theta_true.values, inst);
  out.l_sim = dot(sub(theta.values, theta_true.values),
                  sim_subgradient(at_iterate.x, obs.y, inst.utility));
  return out;
}

double offline_min(LossKind kind, const std::vector<LossRecord>& history,
                   const ParameterSpace& space, const ParameterPoint& theta_true,
                   InfoMode mode) {
  if (history.empty()) return 0.0;
  if (kind == LossKind::Sim) {
    Vec grad_sum(history.front().s.size(), 0.0);
    for (const LossRecord& r : history)
      for (std::size_t i = 0; i < grad_sum.size(); ++i) grad_sum[i] += r.s[i];
    return sim_min_over_space(grad_sum, space, theta_true.values);
  }
  if (mode == InfoMode::Noisy)
    throw std::runtime_error(
        "exact offline minima for pre/sub/est losses are bilevel programs under "
        "noise; re-measure losses against the true actions instead");
  return 0.0;
}

OfflineMinima compute_offline_minima(const std::vector<LossRecord>& records,
                                     const ParameterSpace& space,
                                     const ParameterPoint& theta_true, InfoMode mode) {
  const std::size_t T = records.size();
  OfflineMinima out;
  out.pre.assign(T, mode == InfoMode::Perfect ? 0.0 : kNan);
  out.sub.assign(T, mode == InfoMode::Perfect ? 0.0 : kNan);
  out.est.assign(T, mode == InfoMode::Perfect ? 0.0 : kNan);
  out.sim.assign(T, 0.0);
  if (T == 0) return out;
  Vec grad_sum(records.front().s.size(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < grad_sum.size(); ++i) grad_sum[i] += records[t].s[i];
    out.sim[t] = sim_min_over_space(grad_sum, space, theta_true.values);
  }
  return out;
}

RegretTrace build_regret_trace(const std::vector<LossRecord>& records,
                               const OfflineMinima& offline) {
  const std::size_t T = records.size();
  if (offline.pre.size() != T || offline.sub.size() != T || offline.est.size() != T ||
      offline.sim.size() != T)
    throw std::invalid_argument("records and offline minima lengths disagree");

  RegretTrace tr;
  auto reserve = [T](Vec& v) { v.assign(T, 0.0); };
  reserve(tr.cum_pre);
  reserve(tr.cum_sub);
  reserve(tr.cum_est);
  reserve(tr.cum_sim);
  reserve(tr.avg_regret_pre);
  reserve(tr.avg_regret_sub);
  reserve(tr.avg_regret_est);
  reserve(tr.avg_regret_sim);
  tr.off_pre = offline.pre;
  tr.off_sub = offline.sub;
  tr.off_est = offline.est;
  tr.off_sim = offline.sim;
  tr.step_ms.assign(T, 0.0);

  double cp = 0.0, cs = 0.0, ce = 0.0, cm = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    cp += records[t].l_pre;
    cs += records[t].l_sub;
    ce += records[t].l_est;
    cm += records[t].l_sim;
    tr.cum_pre[t] = cp;
    tr.cum_sub[t] = cs;
    tr.cum_est[t] = ce;
    tr.cum_sim[t] = cm;
    const double steps = static_cast<double>(t + 1);
    tr.avg_regret_pre[t] = (cp - offline.pre[t]) / steps;
    tr.avg_regret_sub[t] = (cs - offline.sub[t]) / steps;
    tr.avg_regret_est[t] = (ce - offline.est[t]) / steps;
    tr.avg_regret_sim[t] = (cm - offline.sim[t]) / steps;
  }
  return tr;
}

std::string check_regret_relations(const RegretTrace& trace, double tol) {
  if (trace.cum_sim.empty()) return {};
  const std::size_t last = trace.cum_sim.size() - 1;
  const double r_sub = trace.cum_sub[last] - trace.off_sub[last];
  const double r_est = trace.cum_est[last] - trace.off_est[last];
  const double r_sim = trace.cum_sim[last] - trace.off_sim[last];
  const double sum_sim = trace.cum_sim[last];
  std::ostringstream err;
  if (!(r_sub + r_est >= -tol))
    err << "R_sub + R_est = " << r_sub + r_est << " < 0; ";
  if (!(r_sim >= r_sub + r_est - tol))
    err << "R_sim = " << r_sim << " < R_sub + R_est = " << r_sub + r_est << "; ";
  if (!(std::abs(r_sub + r_est - sum_sim) <= tol))
    err << "R_sub + R_est = " << r_sub + r_est << " != cumulative simple loss "
        << sum_sim << "; ";
  return err.str();
}

}  // namespace preflearn
