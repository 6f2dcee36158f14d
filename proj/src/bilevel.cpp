#include "preflearn/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "preflearn/forward.hpp"

namespace preflearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EffectiveRows {
  int m = 0;
  Vec A;    // row-major m x n
  Vec rhs;  // m
};

EffectiveRows polyhedral_rows(const Domain& dom) {
  EffectiveRows e;
  if (dom.kind == DomainKind::ContKnapsack) {
    e.m = 1;
    e.A = dom.prices;
    e.rhs = {dom.budget};
  } else if (dom.kind == DomainKind::Polytope) {
    e.m = dom.m;
    e.A = dom.A;
    e.rhs = dom.rhs;
  } else {
    throw std::invalid_argument("prediction-loss oracle requires ck or cp domain");
  }
  return e;
}

// Solves the pattern QP for a fixed set of pinned theta coordinates.
// Unknowns z = (theta_0..theta_{n-1}, x_F, v_B), multipliers follow.
// Returns false on a singular KKT system. `mult_theta` receives the
// multipliers of the pinned-theta rows (ordered as `zero_theta`).
bool solve_pattern_system(const std::vector<std::uint8_t>& active_x,
                          const std::vector<std::uint8_t>& active_g,
                          const std::vector<int>& zero_theta,
                          const ParameterPoint& theta_t, double eta,
                          const Vec& P, const EffectiveRows& rows, const Vec& y,
                          Vec& theta, Vec& x, Vec& v, Vec& mult_theta) {
  const int n = theta_t.dim();
  std::vector<int> free_x, bind_g;
  for (int i = 0; i < n; ++i)
    if (!active_x[i]) free_x.push_back(i);
  for (int j = 0; j < rows.m; ++j)
    if (active_g[j]) bind_g.push_back(j);

  const int nf = static_cast<int>(free_x.size());
  const int nb = static_cast<int>(bind_g.size());
  const int nz = static_cast<int>(zero_theta.size());
  const int nvars = n + nf + nb;
  const int ncons = nf + nb + 1 + nz;
  const int dim = nvars + ncons;

  std::vector<double> M(dim * dim, 0.0);
  Vec rhs(dim, 0.0);
  auto at = [&](int r, int c) -> double& { return M[r * dim + c]; };

  // Hessian block and linear term: 1/2||theta - theta_t||^2 + eta||y - x||^2
  for (int i = 0; i < n; ++i) {
    at(i, i) = 1.0;
    rhs[i] = theta_t.values[i];
  }
  for (int k = 0; k < nf; ++k) {
    at(n + k, n + k) = 2.0 * eta;
    rhs[n + k] = 2.0 * eta * y[free_x[k]];
  }

  // constraint rows enter symmetrically (E below the Hessian, E' to its right)
  int row = nvars;
  auto put = [&](int r, int c, double val) {
    at(r, c) = val;
    at(c, r) = val;
  };
  // stationarity on free coordinates: P_ii x_i - theta_i + sum_B A_ji v_j = 0
  for (int k = 0; k < nf; ++k, ++row) {
    const int i = free_x[k];
    put(row, i, -1.0);
    put(row, n + k, P[i]);
    for (int b = 0; b < nb; ++b) put(row, n + nf + b, rows.A[bind_g[b] * n + i]);
    rhs[row] = 0.0;
  }
  // binding rows: sum_F A_ji x_i = rhs_j
  for (int b = 0; b < nb; ++b, ++row) {
    const int j = bind_g[b];
    for (int k = 0; k < nf; ++k) put(row, n + k, rows.A[j * n + free_x[k]]);
    rhs[row] = rows.rhs[j];
  }
  // simplex sum
  for (int i = 0; i < n; ++i) put(row, i, 1.0);
  rhs[row] = 1.0;
  ++row;
  // pinned theta coordinates
  for (int z = 0; z < nz; ++z, ++row) {
    put(row, zero_theta[z], 1.0);
    rhs[row] = 0.0;
  }

  Vec sol;
  if (!solve_linear_system(std::move(M), std::move(rhs), dim, sol)) return false;

  theta.assign(sol.begin(), sol.begin() + n);
  x.assign(n, 0.0);
  for (int k = 0; k < nf; ++k) x[free_x[k]] = sol[n + k];
  v.assign(rows.m, 0.0);
  for (int b = 0; b < nb; ++b) v[bind_g[b]] = sol[n + nf + b];
  mult_theta.assign(nz, 0.0);
  for (int z = 0; z < nz; ++z) mult_theta[z] = sol[nvars + nf + nb + 1 + z];
  return !theta.empty() && all_finite(theta) && all_finite(x) && all_finite(v);
}

double bilevel_objective(const Vec& theta, const Vec& x, const ParameterPoint& theta_t,
                         double eta, const Vec& y) {
  return 0.5 * l2_dist_sq(theta, theta_t.values) + eta * l2_dist_sq(y, x);
}

}  // namespace

PatternCandidate kkt_pattern_solve(const std::vector<std::uint8_t>& active_x,
                                   const std::vector<std::uint8_t>& active_g,
                                   const ParameterPoint& theta_t, double eta,
                                   const Vec& quad_diag, const Domain& dom,
                                   const Vec& y, double tol) {
  const EffectiveRows rows = polyhedral_rows(dom);
  const int n = theta_t.dim();
  PatternCandidate cand;

  // active-set refinement on theta >= 0: pin the most violated coordinate,
  // unpin coordinates whose multiplier sign says the bound should be free
  std::vector<int> zero_theta;
  Vec theta, x, v, mult;
  const int max_rounds = 3 * n + 3;
  bool settled = false;
  for (int round = 0; round < max_rounds; ++round) {
    if (!solve_pattern_system(active_x, active_g, zero_theta, theta_t, eta, quad_diag,
                              rows, y, theta, x, v, mult))
      return cand;
    int worst = -1;
    double worst_val = -tol;
    for (int i = 0; i < n; ++i) {
      if (std::find(zero_theta.begin(), zero_theta.end(), i) != zero_theta.end())
        continue;
      if (theta[i] < worst_val) {
        worst_val = theta[i];
        worst = i;
      }
    }
    if (worst >= 0) {
      zero_theta.push_back(worst);
      continue;
    }
    // bound multiplier must be <= 0 for a properly active lower bound
    int release = -1;
    double release_val = tol;
    for (std::size_t z = 0; z < zero_theta.size(); ++z) {
      if (mult[z] > release_val) {
        release_val = mult[z];
        release = static_cast<int>(z);
      }
    }
    if (release >= 0) {
      zero_theta.erase(zero_theta.begin() + release);
      continue;
    }
    settled = true;
    break;
  }
  if (!settled) return cand;

  // candidate checks: multiplier signs and primal feasibility
  for (int j = 0; j < rows.m; ++j)
    if (active_g[j] && v[j] < -tol) return cand;
  for (int i = 0; i < n; ++i) {
    if (active_x[i]) {
      // stationarity fixes w_i = (A'v)_i - theta_i on pinned coordinates
      double av = 0.0;
      for (int j = 0; j < rows.m; ++j) av += rows.A[j * n + i] * v[j];
      if (av - theta[i] < -tol) return cand;
    } else if (x[i] < -tol) {
      return cand;
    }
  }
  for (int j = 0; j < rows.m; ++j) {
    if (active_g[j]) continue;
    double rowval = 0.0;
    for (int i = 0; i < n; ++i) rowval += rows.A[j * n + i] * x[i];
    if (rowval > rows.rhs[j] + tol * (1.0 + std::abs(rows.rhs[j]))) return cand;
  }

  cand.feasible = true;
  cand.theta = std::move(theta);
  cand.x = std::move(x);
  cand.v = std::move(v);
  cand.w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!active_x[i]) continue;
    double av = 0.0;
    for (int j = 0; j < rows.m; ++j) av += rows.A[j * n + i] * cand.v[j];
    cand.w[i] = std::max(0.0, av - cand.theta[i]);
  }
  cand.objective = bilevel_objective(cand.theta, cand.x, theta_t, eta, y);
  return cand;
}

namespace {

// order-independent acceptance so branch-and-bound and plain enumeration
// select the same optimum even on objective ties
bool candidate_improves(const PatternCandidate& cand, double best_obj,
                        const Vec& best_theta) {
  if (!cand.feasible) return false;
  if (cand.objective < best_obj) return true;
  if (cand.objective > best_obj || best_theta.empty()) return false;
  const double cn = l2_norm_sq(cand.theta), bn = l2_norm_sq(best_theta);
  if (cn != bn) return cn < bn;
  return std::lexicographical_compare(cand.theta.begin(), cand.theta.end(),
                                      best_theta.begin(), best_theta.end());
}

struct SearchState {
  PatternCandidate best;
  double best_obj = kInf;
  long patterns_solved = 0;
  long nodes = 0;
};

PatternCandidate theta_t_candidate(const ParameterPoint& theta_t, double eta,
                                   const Instance& inst, const Vec& y,
                                   const EffectiveRows& rows) {
  const ForwardSolution fwd = solve_forward(theta_t, inst);
  PatternCandidate cand;
  if (fwd.status != SolveStatus::Optimal) return cand;
  cand.feasible = true;
  cand.theta = theta_t.values;
  cand.x = fwd.x;
  cand.w.assign(theta_t.dim(), 0.0);
  cand.v.assign(rows.m, 0.0);
  cand.objective = bilevel_objective(cand.theta, cand.x, theta_t, eta, y);
  return cand;
}

PreStepResult finish_result(const SearchState& st, const ParameterPoint& theta_t,
                            const EffectiveRows& rows, double tol) {
  if (!st.best.feasible)
    throw std::runtime_error("prediction-loss oracle found no feasible pattern");
  const int n = theta_t.dim();
  PreStepResult res;
  // renormalize fp drift so the simplex constructor accepts the point
  Vec th = st.best.theta;
  double sum = 0.0;
  for (double& c : th) {
    c = std::max(c, 0.0);
    sum += c;
  }
  for (double& c : th) c /= sum;
  res.theta_next = ParameterPoint(std::move(th), theta_t.space);
  res.kkt.x = st.best.x;
  res.kkt.w = st.best.w;
  res.kkt.v = st.best.v;
  res.kkt.active_x.assign(n, 0);
  res.kkt.active_g.assign(rows.m, 0);
  for (int i = 0; i < n; ++i) res.kkt.active_x[i] = std::abs(st.best.x[i]) <= tol;
  for (int j = 0; j < rows.m; ++j) {
    double rowval = 0.0;
    for (int i = 0; i < n; ++i) rowval += rows.A[j * n + i] * st.best.x[i];
    res.kkt.active_g[j] =
        std::abs(rowval - rows.rhs[j]) <= tol * (1.0 + std::abs(rows.rhs[j]));
  }
  res.objective = st.best.objective;
  res.nodes_explored = st.nodes;
  res.patterns_solved = st.patterns_solved;
  return res;
}

// exact piecewise solve for the enumerated 1-d utilities: x(theta) is
// piecewise constant, so each piece contributes a clamped quadratic; piece
// closures are used at breakpoints, ties prefer the smaller |theta|
PreStepResult implicit_pre_interval(const ParameterPoint& theta_t, double eta,
                                    const Instance& inst, const Vec& y) {
  const double tlo = theta_t.space.lo, thi = theta_t.space.hi;
  const double xlo = inst.domain.lo, xhi = inst.domain.hi;
  const double yv = y.at(0);
  struct Piece {
    double a, b, xval;
  };
  std::vector<Piece> pieces;
  if (inst.utility.custom == Custom1dKind::IndicatorAtZero) {
    const double split = -xlo;  // below: endpoint action; at or above: x = 0
    if (tlo < split) pieces.push_back({tlo, std::min(split, thi), xlo});
    if (split <= thi) pieces.push_back({std::max(split, tlo), thi, 0.0});
    if (pieces.empty()) pieces.push_back({tlo, thi, xlo});
  } else {
    if (tlo < 0.0) pieces.push_back({tlo, std::min(0.0, thi), xhi});
    if (thi > 0.0) pieces.push_back({std::max(0.0, tlo), thi, xlo});
    if (tlo <= 0.0 && 0.0 <= thi) pieces.push_back({0.0, 0.0, 0.0});
  }

  double best_theta = tlo, best_obj = kInf, best_x = xlo;
  for (const Piece& p : pieces) {
    const double th = std::clamp(theta_t.values[0], p.a, p.b);
    const double obj = 0.5 * (th - theta_t.values[0]) * (th - theta_t.values[0]) +
                       eta * (yv - p.xval) * (yv - p.xval);
    const bool better =
        obj < best_obj ||
        (obj == best_obj && (std::abs(th) < std::abs(best_theta) ||
                             (std::abs(th) == std::abs(best_theta) && th < best_theta)));
    if (better) {
      best_obj = obj;
      best_theta = th;
      best_x = p.xval;
    }
  }

  PreStepResult res;
  res.theta_next = ParameterPoint(Vec{best_theta}, theta_t.space);
  res.kkt.x = {best_x};
  res.objective = best_obj;
  res.patterns_solved = static_cast<long>(pieces.size());
  res.nodes_explored = static_cast<long>(pieces.size());
  return res;
}

void validate_pre_step_inputs(const ParameterPoint& theta_t, const Instance& inst,
                              const Vec& y, double eta, const PreStepOptions& opts) {
  if (inst.utility.kind != UtilityKind::QuadDiag)
    throw std::invalid_argument("prediction-loss oracle supports the quad utility only");
  if (inst.n > opts.n_cap)
    throw std::invalid_argument(
        "prediction-loss oracle refused: pattern space is 2^(n+m); lower n to at most " +
        std::to_string(opts.n_cap));
  if (theta_t.space.kind != SpaceKind::Simplex)
    throw std::invalid_argument("prediction-loss oracle expects a simplex parameter space");
  if (static_cast<int>(y.size()) != inst.n)
    throw std::invalid_argument("observation dimension mismatch");
  if (!(eta >= 0.0)) throw std::invalid_argument("step size must be nonnegative");
}

}  // namespace

PreStepResult implicit_pre_step(const ParameterPoint& theta_t, double eta,
                                const Instance& inst, const Vec& y,
                                const PreStepOptions& opts) {
  if (inst.domain.kind == DomainKind::Interval)
    return implicit_pre_interval(theta_t, eta, inst, y);
  validate_pre_step_inputs(theta_t, inst, y, eta, opts);

  const EffectiveRows rows = polyhedral_rows(inst.domain);
  const int n = inst.n, m = rows.m, bits = n + m;

  SearchState st;
  PatternCandidate seed = theta_t_candidate(theta_t, eta, inst, y, rows);
  if (candidate_improves(seed, st.best_obj, st.best.theta)) {
    st.best_obj = seed.objective;
    st.best = std::move(seed);
  }

  // branch x-pairs first, largest |y_i| first, so the bound accumulates fast
  std::vector<int> coord_order(n);
  for (int i = 0; i < n; ++i) coord_order[i] = i;
  std::sort(coord_order.begin(), coord_order.end(), [&](int a, int b) {
    if (std::abs(y[a]) != std::abs(y[b])) return std::abs(y[a]) > std::abs(y[b]);
    return a < b;
  });

  struct Node {
    double bound;
    long id;
    int depth;
    std::uint64_t assignment;  // bit k: branch choice at depth k
    bool operator>(const Node& o) const {
      if (bound != o.bound) return bound > o.bound;
      return id > o.id;
    }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> queue;
  long next_id = 0;
  queue.push({0.0, next_id++, 0, 0});

  std::vector<std::uint8_t> ax(n, 0), ag(m, 0);
  while (!queue.empty()) {
    const Node node = queue.top();
    queue.pop();
    ++st.nodes;
    // prune only strictly dominated subtrees so objective ties survive and
    // the tie rule matches plain enumeration
    if (st.best.feasible && node.bound > st.best_obj + 1e-12) continue;
    if (node.depth == bits) {
      for (int k = 0; k < n; ++k) ax[coord_order[k]] = (node.assignment >> k) & 1u;
      for (int j = 0; j < m; ++j) ag[j] = (node.assignment >> (n + j)) & 1u;
      ++st.patterns_solved;
      PatternCandidate cand =
          kkt_pattern_solve(ax, ag, theta_t, eta, inst.utility.quad_diag,
                            inst.domain, y, opts.tol);
      if (candidate_improves(cand, st.best_obj, st.best.theta)) {
        st.best_obj = cand.objective;
        st.best = std::move(cand);
      }
      continue;
    }
    // branch: child bound adds eta*y_i^2 when the coordinate is pinned to zero
    double pin_bound = node.bound;
    if (node.depth < n) {
      const int i = coord_order[node.depth];
      pin_bound += eta * y[i] * y[i];
    }
    const Node keep{node.bound, next_id++, node.depth + 1, node.assignment};
    const Node pin{pin_bound, next_id++, node.depth + 1,
                   node.assignment | (std::uint64_t(1) << node.depth)};
    if (!(st.best.feasible && keep.bound > st.best_obj + 1e-12)) queue.push(keep);
    if (!(st.best.feasible && pin.bound > st.best_obj + 1e-12)) queue.push(pin);
  }
  return finish_result(st, theta_t, rows, opts.tol);
}

PreStepResult implicit_pre_exhaustive(const ParameterPoint& theta_t, double eta,
                                      const Instance& inst, const Vec& y,
                                      const PreStepOptions& opts) {
  if (inst.domain.kind == DomainKind::Interval)
    return implicit_pre_interval(theta_t, eta, inst, y);
  validate_pre_step_inputs(theta_t, inst, y, eta, opts);

  const EffectiveRows rows = polyhedral_rows(inst.domain);
  const int n = inst.n, m = rows.m;

  SearchState st;
  PatternCandidate seed = theta_t_candidate(theta_t, eta, inst, y, rows);
  if (candidate_improves(seed, st.best_obj, st.best.theta)) {
    st.best_obj = seed.objective;
    st.best = std::move(seed);
  }

  std::vector<std::uint8_t> ax(n, 0), ag(m, 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << (n + m)); ++mask) {
    for (int i = 0; i < n; ++i) ax[i] = (mask >> i) & 1u;
    for (int j = 0; j < m; ++j) ag[j] = (mask >> (n + j)) & 1u;
    ++st.patterns_solved;
    PatternCandidate cand = kkt_pattern_solve(ax, ag, theta_t, eta,
                                              inst.utility.quad_diag, inst.domain, y,
                                              opts.tol);
    if (candidate_improves(cand, st.best_obj, st.best.theta)) {
      st.best_obj = cand.objective;
      st.best = std::move(cand);
    }
    ++st.nodes;
  }
  return finish_result(st, theta_t, rows, opts.tol);
}

}  // namespace preflearn
