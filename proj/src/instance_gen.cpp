#include "preflearn/instance_gen.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "preflearn/rng.hpp"

namespace preflearn {

namespace {

Vec draw_price_like(StreamRng& rng, const Vec& theta_true) {
  const int n = static_cast<int>(theta_true.size());
  Vec p(n);
  for (int i = 0; i < n; ++i)
    p[i] = theta_true[i] + 100.0 + rng.uniform_int(-10, 10);
  return p;
}

InstanceStream scripted_interval_stream(const GenConfig& cfg) {
  InstanceStream s;
  s.theta_true = ParameterPoint(Vec{0.0}, ParameterSpace::box(1, -3.0, 3.0));
  s.steps.reserve(cfg.T);
  for (int t = 1; t <= cfg.T; ++t)
    s.steps.push_back(make_instance(t,
                                    UtilityForm::custom_1d(Custom1dKind::IndicatorAtZero),
                                    Domain::interval(-1.0, 1.0)));
  return s;
}

}  // namespace

InstanceStream gen_instance_stream(const GenConfig& cfg, int instance_index) {
  if (cfg.n <= 0 || cfg.T <= 0) throw std::invalid_argument("n and T must be positive");
  if (cfg.domain == DomainKind::Interval) return scripted_interval_stream(cfg);

  const int n = cfg.n;
  InstanceStream s;

  {
    StreamRng rng(cfg.seed, instance_index, rng_tag::kThetaTrue);
    Vec th(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      th[i] = rng.uniform(1.0, 1000.0);
      sum += th[i];
    }
    for (double& v : th) v /= sum;
    s.theta_true = ParameterPoint(std::move(th), ParameterSpace::simplex(n));
  }

  UtilityForm utility;
  switch (cfg.utility) {
    case UtilityKind::QuadDiag: {
      StreamRng rng(cfg.seed, instance_index, rng_tag::kQuadDiag);
      Vec diag(n);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        diag[i] = rng.uniform(1.0, 21.0);
        sum += diag[i];
      }
      for (double& v : diag) v /= sum;
      s.quad_diag = diag;
      utility = UtilityForm::quad(std::move(diag));
      break;
    }
    case UtilityKind::CesRho2:
      utility = UtilityForm::ces();
      break;
    case UtilityKind::Bilinear:
      utility = UtilityForm::bilinear();
      break;
    case UtilityKind::CobbDouglas:
      utility = UtilityForm::cobb_douglas();
      break;
    case UtilityKind::Custom1d:
      throw std::invalid_argument("custom-1d streams use the interval domain");
  }

  // compatibility matrix of the experiments
  switch (cfg.domain) {
    case DomainKind::ContKnapsack:
      if (cfg.utility == UtilityKind::CesRho2)
        throw std::invalid_argument("ces runs use the eq-knapsack domain");
      break;
    case DomainKind::Polytope:
    case DomainKind::BinKnapsack:
      if (cfg.utility != UtilityKind::QuadDiag)
        throw std::invalid_argument("polytope/binary domains support the quad utility");
      break;
    case DomainKind::EqKnapsack:
      if (cfg.utility != UtilityKind::CesRho2)
        throw std::invalid_argument("eq-knapsack runs use the ces utility");
      break;
    case DomainKind::Interval:
      break;
  }

  s.steps.reserve(cfg.T);
  for (int t = 1; t <= cfg.T; ++t) {
    switch (cfg.domain) {
      case DomainKind::ContKnapsack:
      case DomainKind::BinKnapsack:
      case DomainKind::EqKnapsack: {
        StreamRng prng(cfg.seed, instance_index, rng_tag::kPrices, t);
        Vec p = draw_price_like(prng, s.theta_true.values);
        if (cfg.domain == DomainKind::BinKnapsack)
          for (double& v : p) v = std::round(v);
        double psum = 0.0;
        for (double v : p) psum += v;
        StreamRng brng(cfg.seed, instance_index, rng_tag::kBudget, t);
        const double b = brng.uniform(1.0, psum);
        Domain d = cfg.domain == DomainKind::ContKnapsack
                       ? Domain::cont_knapsack(std::move(p), b)
                       : cfg.domain == DomainKind::BinKnapsack
                             ? Domain::bin_knapsack(std::move(p), b)
                             : Domain::eq_knapsack(std::move(p), b);
        s.steps.push_back(make_instance(t, utility, std::move(d)));
        break;
      }
      case DomainKind::Polytope: {
        const int m = cfg.m;
        Vec A(m * n);
        Vec rhs(m);
        StreamRng arng(cfg.seed, instance_index, rng_tag::kRows, t);
        StreamRng crng(cfg.seed, instance_index, rng_tag::kRhs, t);
        for (int j = 0; j < m; ++j) {
          Vec row = draw_price_like(arng, s.theta_true.values);
          double row_sum = 0.0;
          for (int i = 0; i < n; ++i) {
            A[j * n + i] = row[i];
            row_sum += row[i];
          }
          rhs[j] = crng.uniform(1.0, row_sum);
        }
        s.steps.push_back(
            make_instance(t, utility, Domain::polytope(m, n, std::move(A), std::move(rhs))));
        break;
      }
      case DomainKind::Interval:
        break;  // unreachable
    }
  }
  return s;
}

double noise_scale_delta(const std::vector<Vec>& true_actions) {
  if (true_actions.empty()) return 0.0;
  double s = 0.0;
  for (const Vec& x : true_actions) s += l2_norm(x);
  return s / static_cast<double>(true_actions.size());
}

Vec random_feasible_point(const Domain& dom, std::uint64_t seed, int instance_index,
                          int t) {
  StreamRng rng(seed, instance_index, rng_tag::kSubopt, t);
  const int n = dom.dim();
  switch (dom.kind) {
    case DomainKind::ContKnapsack:
    case DomainKind::EqKnapsack: {
      // random budget split: Dirichlet(1) weights, then scale
      Vec d(n);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        d[i] = rng.exponential();
        sum += d[i];
      }
      const double scale =
          dom.kind == DomainKind::EqKnapsack ? 1.0 : rng.uniform(0.0, 1.0);
      Vec z(n);
      for (int i = 0; i < n; ++i)
        z[i] = scale * dom.budget * (d[i] / sum) / dom.prices[i];
      return z;
    }
    case DomainKind::Polytope: {
      Vec d(n);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        d[i] = rng.exponential();
        sum += d[i];
      }
      for (double& v : d) v /= sum;
      double sigma = std::numeric_limits<double>::infinity();
      for (int j = 0; j < dom.m; ++j) {
        double row = 0.0;
        for (int i = 0; i < n; ++i) row += dom.A[j * n + i] * d[i];
        if (row > 0.0) sigma = std::min(sigma, dom.rhs[j] / row);
      }
      if (!std::isfinite(sigma)) sigma = 0.0;
      const double u = rng.uniform(0.0, 1.0);
      Vec z(n);
      for (int i = 0; i < n; ++i) z[i] = u * sigma * d[i];
      return z;
    }
    case DomainKind::Interval:
      return Vec{rng.uniform(dom.lo, dom.hi)};
    case DomainKind::BinKnapsack:
      throw std::invalid_argument(
          "suboptimal-feasible noise is limited to continuous domains");
  }
  throw std::logic_error("unknown domain kind");
}

std::vector<Observation> apply_noise(const std::vector<Vec>& true_actions,
                                     const std::vector<Instance>& steps,
                                     NoiseMode mode, std::uint64_t seed,
                                     int instance_index) {
  if (true_actions.size() != steps.size())
    throw std::invalid_argument("true actions and steps lengths disagree");
  const std::size_t T = true_actions.size();
  std::vector<Observation> obs(T);

  if (mode == NoiseMode::Perfect) {
    for (std::size_t t = 0; t < T; ++t) obs[t] = {true_actions[t], mode};
    return obs;
  }

  if (mode == NoiseMode::SuboptimalFeasible) {
    for (std::size_t t = 0; t < T; ++t) {
      const Instance& inst = steps[t];
      StreamRng rng(seed, instance_index, rng_tag::kNoise, inst.t);
      const double beta = rng.uniform(0.0, 0.2);
      const Vec z = random_feasible_point(inst.domain, seed, instance_index, inst.t);
      Vec y(true_actions[t].size());
      for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = (1.0 - beta) * true_actions[t][i] + beta * z[i];
      obs[t] = {std::move(y), mode};
    }
    return obs;
  }

  const double delta = noise_scale_delta(true_actions);
  const double range = mode == NoiseMode::UniformSmall
                           ? delta / static_cast<double>(steps.front().n)
                           : delta;
  for (std::size_t t = 0; t < T; ++t) {
    StreamRng rng(seed, instance_index, rng_tag::kNoise, steps[t].t);
    Vec y = true_actions[t];
    for (double& yi : y) yi += rng.uniform(-range, range);
    obs[t] = {std::move(y), mode};
  }
  return obs;
}

}  // namespace preflearn
