#include "preflearn/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace preflearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec floored_theta(const Vec& theta) {
  Vec t = theta;
  for (double& ti : t) {
    if (!std::isfinite(ti) || ti < -1e-6)
      throw std::domain_error("theta coordinate below numerical guard");
    ti = std::max(ti, kThetaFloor);
  }
  return t;
}

// true if a beats b under the smaller-norm-then-lexicographic tie rule
bool tie_break_prefers(const Vec& a, const Vec& b) {
  const double na = l2_norm_sq(a), nb = l2_norm_sq(b);
  if (na != nb) return na < nb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

ForwardSolution finish(Vec x, double objective, SolveStatus status, int iterations) {
  ForwardSolution sol;
  sol.tie_break_norm = l2_norm(x);
  sol.x = std::move(x);
  sol.objective = objective;
  sol.status = status;
  sol.iterations = iterations;
  return sol;
}

double quad_objective(const Vec& x, const Vec& theta, const Vec& P) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += 0.5 * P[i] * x[i] * x[i] - theta[i] * x[i];
  return s;
}

// ---------------------------------------------------------------------------
// Quadratic / continuous knapsack: bisection on the budget multiplier
// ---------------------------------------------------------------------------

ForwardSolution solve_quad_knapsack(const Vec& theta, const Domain& dom, const Vec& P) {
  const int n = dom.dim();
  if (dom.budget < 0.0) return finish(Vec(n, 0.0), 0.0, SolveStatus::Infeasible, 0);
  if (dom.budget == 0.0) return finish(Vec(n, 0.0), 0.0, SolveStatus::Optimal, 0);

  auto x_of = [&](double lambda) {
    Vec x(n);
    for (int i = 0; i < n; ++i)
      x[i] = std::max(0.0, (theta[i] - lambda * dom.prices[i]) / P[i]);
    return x;
  };

  Vec x = x_of(0.0);
  double spend = dot(dom.prices, x);
  if (spend <= dom.budget) {
    const double obj = quad_objective(x, theta, P);
    return finish(std::move(x), obj, SolveStatus::Optimal, 0);
  }

  // <p, x(lambda)> is nonincreasing in lambda and reaches 0 at lambda_hi
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < n; ++i) hi = std::max(hi, theta[i] / dom.prices[i]);
  const double tol = 1e-10 * dom.budget;
  int it = 0;
  while (it < 200) {
    const double mid = 0.5 * (lo + hi);
    x = x_of(mid);
    spend = dot(dom.prices, x);
    ++it;
    if (std::abs(spend - dom.budget) <= tol) break;
    if (spend > dom.budget)
      lo = mid;
    else
      hi = mid;
  }
  return finish(x, quad_objective(x, theta, P),
                std::abs(spend - dom.budget) <= tol ? SolveStatus::Optimal
                                                    : SolveStatus::MaxIter,
                it);
}

// ---------------------------------------------------------------------------
// Quadratic / polytope: operator-splitting (ADMM) iteration with an exact
// active-set polish. The splitting handles the nearly parallel rows the
// generator produces; the polish solves the KKT system of the identified
// active set so the returned point meets the residual targets exactly.
// ---------------------------------------------------------------------------

struct Cholesky {
  int n = 0;
  std::vector<double> L;  // row-major lower factor

  bool factor(const std::vector<double>& M, int dim) {
    n = dim;
    L.assign(n * n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = M[i * n + j];
        for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
        if (i == j) {
          if (s <= 0.0) return false;
          L[i * n + i] = std::sqrt(s);
        } else {
          L[i * n + j] = s / L[j * n + j];
        }
      }
    }
    return true;
  }

  void solve(Vec& b) const {
    for (int i = 0; i < n; ++i) {
      double s = b[i];
      for (int k = 0; k < i; ++k) s -= L[i * n + k] * b[k];
      b[i] = s / L[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = b[i];
      for (int k = i + 1; k < n; ++k) s -= L[k * n + i] * b[k];
      b[i] = s / L[i * n + i];
    }
  }
};

// Exact KKT solve for a fixed active set: free coordinates F, binding rows B.
// Returns false when the reduced system is singular or any sign / feasibility
// condition fails. On success x, v, w hold an exact KKT point.
bool polytope_polish(const std::vector<int>& free_x, const std::vector<int>& bind_g,
                     const Vec& theta, const Vec& P, const Domain& dom, Vec& x, Vec& v,
                     Vec& w, double tol) {
  const int n = dom.dim(), m = dom.m;
  const int nf = static_cast<int>(free_x.size());
  const int nb = static_cast<int>(bind_g.size());
  const int dim = nf + nb;
  x.assign(n, 0.0);
  v.assign(m, 0.0);
  w.assign(n, 0.0);

  if (dim > 0) {
    // [ P_FF  A_BF' ] [x_F]   [theta_F]
    // [ A_BF   0    ] [v_B] = [rhs_B  ]
    std::vector<double> M(dim * dim, 0.0);
    Vec rhs(dim, 0.0);
    for (int k = 0; k < nf; ++k) {
      M[k * dim + k] = P[free_x[k]];
      rhs[k] = theta[free_x[k]];
      for (int b = 0; b < nb; ++b) {
        const double a = dom.A[bind_g[b] * n + free_x[k]];
        M[k * dim + (nf + b)] = a;
        M[(nf + b) * dim + k] = a;
      }
    }
    for (int b = 0; b < nb; ++b) rhs[nf + b] = dom.rhs[bind_g[b]];

    Vec sol;
    if (!solve_linear_system(std::move(M), std::move(rhs), dim, sol)) return false;
    for (int k = 0; k < nf; ++k) x[free_x[k]] = sol[k];
    for (int b = 0; b < nb; ++b) v[bind_g[b]] = sol[nf + b];
  }

  // remaining multipliers from stationarity; then sign and feasibility checks
  for (int i = 0; i < n; ++i) {
    double av = 0.0;
    for (int j = 0; j < m; ++j) av += dom.A[j * n + i] * v[j];
    w[i] = P[i] * x[i] - theta[i] + av;
  }
  for (int k = 0; k < nf; ++k) {
    if (x[free_x[k]] < -tol) return false;
    w[free_x[k]] = 0.0;  // exact by construction, clear roundoff
  }
  for (int i = 0; i < n; ++i)
    if (w[i] < -tol) return false;
  for (int j = 0; j < m; ++j) {
    if (v[j] < -tol) return false;
    double row = 0.0;
    for (int i = 0; i < n; ++i) row += dom.A[j * n + i] * x[i];
    if (row > dom.rhs[j] + tol * (1.0 + std::abs(dom.rhs[j]))) return false;
  }
  for (double& wi : w) wi = std::max(wi, 0.0);
  for (double& vj : v) vj = std::max(vj, 0.0);
  return true;
}

ForwardSolution solve_quad_polytope(const Vec& theta, const Domain& dom, const Vec& P,
                                    const QpOptions& opts) {
  const int n = dom.dim(), m = dom.m;
  for (int j = 0; j < m; ++j)
    if (dom.rhs[j] < 0.0) return finish(Vec(n, 0.0), 0.0, SolveStatus::Infeasible, 0);

  // row-equilibrated constraints: unit-norm rows condition the splitting
  Vec As(m * n), cs(m);
  for (int j = 0; j < m; ++j) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += dom.A[j * n + i] * dom.A[j * n + i];
    norm = std::sqrt(std::max(norm, 1e-300));
    for (int i = 0; i < n; ++i) As[j * n + i] = dom.A[j * n + i] / norm;
    cs[j] = dom.rhs[j] / norm;
  }

  // ADMM on min 1/2 x'Px - theta'x  s.t.  l <= [I; As] x <= u
  const double rho = 1.0, sigma = 1e-6, alpha = 1.6;
  std::vector<double> M(n * n, 0.0);
  for (int i = 0; i < n; ++i) M[i * n + i] = P[i] + sigma + rho;  // identity block
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b) {
        const double val = rho * As[j * n + a] * As[j * n + b];
        M[a * n + b] += val;
        if (a != b) M[b * n + a] += val;
      }
  Cholesky chol;
  if (!chol.factor(M, n))
    return finish(Vec(n, 0.0), 0.0, SolveStatus::MaxIter, 0);

  const int rows = n + m;
  auto apply_A = [&](const Vec& xx, Vec& out) {
    for (int i = 0; i < n; ++i) out[i] = xx[i];
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += As[j * n + i] * xx[i];
      out[n + j] = s;
    }
  };
  auto clamp_row = [&](int r, double val) {
    if (val < 0.0) return 0.0;
    if (r >= n && val > cs[r - n]) return cs[r - n];
    return val;  // identity rows have no upper bound
  };

  Vec x(n, 0.0), z(rows, 0.0), y(rows, 0.0), xt(n), zt(rows);
  int it = 0;
  SolveStatus status = SolveStatus::MaxIter;
  Vec v, w;

  auto try_polish = [&]() {
    std::vector<int> free_x, bind_g;
    const double act_tol = 1e-7;
    for (int i = 0; i < n; ++i)
      if (z[i] > act_tol * (1.0 + std::abs(z[i]))) free_x.push_back(i);
    for (int j = 0; j < m; ++j)
      if (z[n + j] >= cs[j] - act_tol * (1.0 + cs[j])) bind_g.push_back(j);
    if (!polytope_polish(free_x, bind_g, theta, P, dom, x, v, w, 1e-9)) return false;
    status = SolveStatus::Optimal;
    return true;
  };

  for (; it < opts.max_iter; ++it) {
    for (int i = 0; i < n; ++i) xt[i] = sigma * x[i] + theta[i];
    for (int r = 0; r < rows; ++r) {
      const double t = rho * z[r] - y[r];
      if (r < n)
        xt[r] += t;
      else
        for (int i = 0; i < n; ++i) xt[i] += As[(r - n) * n + i] * t;
    }
    chol.solve(xt);
    apply_A(xt, zt);
    for (int i = 0; i < n; ++i) x[i] = alpha * xt[i] + (1.0 - alpha) * x[i];
    for (int r = 0; r < rows; ++r) {
      const double zr = alpha * zt[r] + (1.0 - alpha) * z[r];
      const double cand = zr + y[r] / rho;
      const double znew = clamp_row(r, cand);
      y[r] += rho * (zr - znew);
      z[r] = znew;
    }
    if ((it % 50) == 49 && try_polish()) break;
  }
  if (status != SolveStatus::Optimal && try_polish()) {
    // polished on the final iterate
  }
  if (status != SolveStatus::Optimal) {
    // report the unpolished splitting iterate; stationarity of the Lagrangian
    // is P x - theta + [I; As]' y = 0 at a solution
    const bool ok = dom.feasible(x, opts.feas_tol);
    double stat = 0.0;
    for (int i = 0; i < n; ++i) {
      double g = P[i] * x[i] - theta[i] + y[i];
      for (int j = 0; j < m; ++j) g += As[j * n + i] * y[n + j];
      stat = std::max(stat, std::abs(g));
    }
    if (ok && stat <= opts.kkt_tol) status = SolveStatus::Optimal;
  }
  return finish(x, quad_objective(x, theta, P), status, it);
}

}  // namespace

ForwardSolution solve_quad_continuous(const ParameterPoint& theta, const Domain& dom,
                                      const Vec& quad_diag, const QpOptions& opts) {
  for (double p : quad_diag)
    if (!(p > 0.0)) throw std::invalid_argument("quad diagonal must be positive");
  if (dom.kind == DomainKind::ContKnapsack)
    return solve_quad_knapsack(theta.values, dom, quad_diag);
  if (dom.kind == DomainKind::Polytope)
    return solve_quad_polytope(theta.values, dom, quad_diag, opts);
  throw std::invalid_argument("solve_quad_continuous requires ck or cp domain");
}

// ---------------------------------------------------------------------------
// Binary knapsack DP
// ---------------------------------------------------------------------------

ForwardSolution solve_binary_knapsack(const ParameterPoint& theta, const Domain& dom,
                                      const Vec& quad_diag) {
  const int n = dom.dim();
  std::vector<int> w(n);
  for (int i = 0; i < n; ++i) {
    const double p = dom.prices[i];
    if (std::abs(p - std::round(p)) > 1e-9)
      throw std::invalid_argument("binary knapsack requires integer prices");
    w[i] = static_cast<int>(std::round(p));
  }
  const int cap = std::max(0, static_cast<int>(std::floor(dom.budget)));

  // On binaries x_i^2 = x_i, so minimizing 1/2 x'Px - <theta, x> is
  // maximizing sum (theta_i - P_ii/2) x_i: a linear 0/1 knapsack.
  Vec value(n);
  for (int i = 0; i < n; ++i) value[i] = theta.values[i] - 0.5 * quad_diag[i];

  // Suffix DP over (value, item count); reconstruction from item 1 prefers
  // not taking on exact ties, which realizes the smaller-norm-then-lex rule
  // (for binaries the squared norm is the item count).
  struct Cell {
    double val;
    int cnt;
  };
  std::vector<std::vector<Cell>> dp(n + 1, std::vector<Cell>(cap + 1, {0.0, 0}));
  for (int i = n - 1; i >= 0; --i) {
    for (int c = 0; c <= cap; ++c) {
      Cell best = dp[i + 1][c];  // skip item i
      if (w[i] <= c) {
        const Cell take{dp[i + 1][c - w[i]].val + value[i], dp[i + 1][c - w[i]].cnt + 1};
        if (take.val > best.val || (take.val == best.val && take.cnt < best.cnt))
          best = take;
      }
      dp[i][c] = best;
    }
  }

  Vec x(n, 0.0);
  int c = cap;
  for (int i = 0; i < n; ++i) {
    const Cell skip = dp[i + 1][c];
    if (skip.val == dp[i][c].val && skip.cnt == dp[i][c].cnt) continue;
    x[i] = 1.0;
    c -= w[i];
  }
  return finish(x, quad_objective(x, theta.values, quad_diag), SolveStatus::Optimal, 0);
}

// ---------------------------------------------------------------------------
// CES / Cobb-Douglas / bilinear closed forms
// ---------------------------------------------------------------------------

ForwardSolution solve_ces_eq_knapsack(const ParameterPoint& theta, const Domain& dom) {
  if (dom.kind != DomainKind::EqKnapsack)
    throw std::invalid_argument("CES solver requires the eq-knapsack domain");
  const Vec t = floored_theta(theta.values);
  const int n = dom.dim();
  double denom = 0.0;
  for (int i = 0; i < n; ++i) denom += dom.prices[i] * dom.prices[i] / t[i];
  const double lambda = 2.0 * dom.budget / denom;
  Vec x(n);
  double obj = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = lambda * dom.prices[i] / (2.0 * t[i]);
    obj += t[i] * x[i] * x[i];
  }
  return finish(std::move(x), obj, SolveStatus::Optimal, 0);
}

ForwardSolution solve_bilinear_knapsack(const ParameterPoint& theta, const Domain& dom) {
  if (dom.kind != DomainKind::ContKnapsack)
    throw std::invalid_argument("bilinear solver requires the cont-knapsack domain");
  const int n = dom.dim();
  int best = -1;
  double best_ratio = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = theta.values[i] / dom.prices[i];
    if (r > best_ratio) {
      best_ratio = r;
      best = i;
    }
  }
  Vec x(n, 0.0);
  if (best >= 0) x[best] = dom.budget / dom.prices[best];
  return finish(x, -dot(theta.values, x), SolveStatus::Optimal, 0);
}

ForwardSolution solve_cobb_douglas_knapsack(const ParameterPoint& theta,
                                            const Domain& dom) {
  if (dom.kind != DomainKind::ContKnapsack)
    throw std::invalid_argument("Cobb-Douglas solver requires the cont-knapsack domain");
  const Vec t = floored_theta(theta.values);
  const int n = dom.dim();
  Vec x(n);
  double obj = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = t[i] * dom.budget / dom.prices[i];
    obj -= t[i] * std::log(x[i]);
  }
  return finish(std::move(x), obj, SolveStatus::Optimal, 0);
}

// ---------------------------------------------------------------------------
// Enumerated 1-d utilities
// ---------------------------------------------------------------------------

ForwardSolution solve_custom_1d(double theta, const Instance& inst) {
  if (inst.domain.kind != DomainKind::Interval)
    throw std::invalid_argument("custom-1d solver requires the interval domain");
  const double lo = inst.domain.lo, hi = inst.domain.hi;
  double x = 0.0;
  if (inst.utility.custom == Custom1dKind::IndicatorAtZero) {
    // min x + theta*c(x) over [lo, hi]: candidates are the left endpoint and,
    // when 0 is inside, the indicator point x = 0 with value -theta.
    const bool zero_inside = lo <= 0.0 && 0.0 <= hi;
    if (!zero_inside) {
      x = lo;
    } else if (-theta < lo || (-theta == lo && 0.0 < std::abs(lo))) {
      x = 0.0;  // ties prefer the smaller-norm solution
    } else {
      x = lo;
    }
  } else {
    // min theta*x over [lo, hi]
    if (theta > 0.0) {
      x = lo;
    } else if (theta < 0.0) {
      x = hi;
    } else {
      x = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : (std::abs(lo) <= std::abs(hi) ? lo : hi);
    }
  }
  const double obj =
      f1_value(Vec{x}, inst.utility) + theta * c_map(Vec{x}, inst.utility)[0];
  return finish(Vec{x}, obj, SolveStatus::Optimal, 0);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

ForwardSolution solve_forward(const ParameterPoint& theta, const Instance& inst,
                              const QpOptions& opts) {
  switch (inst.utility.kind) {
    case UtilityKind::QuadDiag:
      if (inst.domain.kind == DomainKind::BinKnapsack)
        return solve_binary_knapsack(theta, inst.domain, inst.utility.quad_diag);
      return solve_quad_continuous(theta, inst.domain, inst.utility.quad_diag, opts);
    case UtilityKind::CesRho2:
      return solve_ces_eq_knapsack(theta, inst.domain);
    case UtilityKind::Bilinear:
      return solve_bilinear_knapsack(theta, inst.domain);
    case UtilityKind::CobbDouglas:
      return solve_cobb_douglas_knapsack(theta, inst.domain);
    case UtilityKind::Custom1d:
      return solve_custom_1d(theta.values.at(0), inst);
  }
  throw std::invalid_argument("unsupported utility/domain combination");
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace {

struct GridBest {
  Vec x;
  double obj = kInf;
  bool found = false;

  void offer(const Vec& cand, double val) {
    if (!found || val < obj ||
        (val == obj && tie_break_prefers(cand, x))) {
      x = cand;
      obj = val;
      found = true;
    }
  }
};

// Scan an axis-aligned grid over [lo_i, hi_i] with `points` nodes per axis,
// keeping the best feasible point under `eval`.
template <typename Feasible, typename Eval>
void grid_scan(const Vec& lo, const Vec& hi, int points, const Feasible& feasible,
               const Eval& eval, GridBest& best) {
  const int n = static_cast<int>(lo.size());
  std::vector<int> idx(n, 0);
  Vec x(n);
  while (true) {
    for (int i = 0; i < n; ++i)
      x[i] = points == 1 ? lo[i] : lo[i] + (hi[i] - lo[i]) * idx[i] / (points - 1);
    if (feasible(x)) best.offer(x, eval(x));
    int k = n - 1;
    while (k >= 0 && ++idx[k] == points) idx[k--] = 0;
    if (k < 0) break;
  }
}

}  // namespace

ForwardSolution brute_force_forward(const ParameterPoint& theta, const Instance& inst,
                                    double resolution) {
  const int n = inst.n;
  const Domain& dom = inst.domain;
  auto objective = [&](const Vec& x) { return eval_f(x, theta.values, inst); };

  if (dom.kind == DomainKind::BinKnapsack) {
    if (n > 15) throw std::invalid_argument("binary enumeration refused for n > 15");
    GridBest best;
    Vec x(n);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      double spend = 0.0;
      for (int i = 0; i < n; ++i) {
        x[i] = (mask >> i) & 1u ? 1.0 : 0.0;
        spend += x[i] * dom.prices[i];
      }
      if (spend <= dom.budget) best.offer(x, objective(x));
    }
    return finish(best.x, best.obj, SolveStatus::Optimal, 0);
  }

  if (inst.utility.kind == UtilityKind::Bilinear) {
    // exact: enumerate the knapsack vertices 0 and (b/p_i) e_i
    GridBest best;
    best.offer(Vec(n, 0.0), 0.0);
    for (int i = 0; i < n; ++i) {
      Vec x(n, 0.0);
      x[i] = dom.budget / dom.prices[i];
      best.offer(x, objective(x));
    }
    return finish(best.x, best.obj, SolveStatus::Optimal, 0);
  }

  if (dom.kind == DomainKind::Interval) {
    GridBest best;
    const int points = std::max(2, static_cast<int>(std::ceil(1.0 / resolution)) + 1);
    grid_scan(Vec{dom.lo}, Vec{dom.hi}, points, [](const Vec&) { return true; },
              objective, best);
    // candidate breakpoints of the enumerated pairs
    if (dom.lo <= 0.0 && 0.0 <= dom.hi) best.offer(Vec{0.0}, objective(Vec{0.0}));
    return finish(best.x, best.obj, SolveStatus::Optimal, 0);
  }

  if (n > 3) throw std::invalid_argument("grid search refused for n > 3");

  auto feasible = [&](const Vec& x) { return dom.feasible(x, 1e-12); };
  Vec hi = dom.coordinate_bounds();
  Vec lo(n, 0.0);
  if (inst.utility.kind == UtilityKind::CobbDouglas)
    for (double& v : lo) v = 1e-6;

  GridBest best;
  const int points = std::max(2, static_cast<int>(std::ceil(1.0 / resolution)) + 1);

  if (dom.kind == DomainKind::EqKnapsack) {
    // grid the first n-1 coordinates; the last is pinned by the budget line
    auto eval_slice = [&](const Vec& head) {
      Vec x(head);
      x.push_back(0.0);
      double spent = 0.0;
      for (int i = 0; i < n - 1; ++i) spent += dom.prices[i] * head[i];
      x[n - 1] = (dom.budget - spent) / dom.prices[n - 1];
      return x;
    };
    GridBest head_best;
    Vec head_lo(lo.begin(), lo.end() - 1), head_hi(hi.begin(), hi.end() - 1);
    grid_scan(
        head_lo, head_hi, points,
        [&](const Vec& head) {
          const Vec x = eval_slice(head);
          return x[n - 1] >= 0.0;
        },
        [&](const Vec& head) { return objective(eval_slice(head)); }, head_best);
    const Vec x = eval_slice(head_best.x);
    return finish(x, head_best.obj, SolveStatus::Optimal, 0);
  }

  grid_scan(lo, hi, points, feasible, objective, best);
  // one refinement pass around the coarse optimum (objective is convex here)
  if (best.found) {
    Vec rlo(n), rhi(n);
    for (int i = 0; i < n; ++i) {
      const double h = (hi[i] - lo[i]) / (points - 1);
      rlo[i] = std::max(lo[i], best.x[i] - h);
      rhi[i] = std::min(hi[i], best.x[i] + h);
    }
    grid_scan(rlo, rhi, 41, feasible, objective, best);
  }
  if (!best.found) return finish(Vec(n, 0.0), 0.0, SolveStatus::Infeasible, 0);
  return finish(best.x, best.obj, SolveStatus::Optimal, 0);
}

}  // namespace preflearn
