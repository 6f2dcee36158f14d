#include "preflearn/types.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace preflearn {

// ---------------------------------------------------------------------------
// ParameterSpace / ParameterPoint
// ---------------------------------------------------------------------------

ParameterSpace ParameterSpace::simplex(int dim) {
  if (dim <= 0) throw std::invalid_argument("simplex dimension must be positive");
  ParameterSpace s;
  s.kind = SpaceKind::Simplex;
  s.dim = dim;
  return s;
}

ParameterSpace ParameterSpace::box(int dim, double lo, double hi) {
  if (dim <= 0) throw std::invalid_argument("box dimension must be positive");
  if (!(lo < hi)) throw std::invalid_argument("box requires lo < hi");
  ParameterSpace s;
  s.kind = SpaceKind::Box;
  s.dim = dim;
  s.lo = lo;
  s.hi = hi;
  return s;
}

bool ParameterSpace::contains(const Vec& v, double tol) const {
  if (static_cast<int>(v.size()) != dim) return false;
  if (!all_finite(v)) return false;
  if (kind == SpaceKind::Simplex) {
    double sum = 0.0;
    for (double x : v) {
      if (x < -tol) return false;
      sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
  }
  for (double x : v)
    if (x < lo - tol || x > hi + tol) return false;
  return true;
}

ParameterPoint::ParameterPoint(Vec v, ParameterSpace s) : values(std::move(v)), space(s) {
  if (!space.contains(values))
    throw std::invalid_argument("parameter point violates its space invariants");
}

ParameterPoint uniform_simplex_point(int dim) {
  return ParameterPoint(Vec(dim, 1.0 / dim), ParameterSpace::simplex(dim));
}

// ---------------------------------------------------------------------------
// UtilityForm
// ---------------------------------------------------------------------------

UtilityForm UtilityForm::quad(Vec diag) {
  for (double p : diag)
    if (!(p > 0.0)) throw std::invalid_argument("quad-diag requires P_ii > 0");
  UtilityForm u;
  u.kind = UtilityKind::QuadDiag;
  u.quad_diag = std::move(diag);
  return u;
}

UtilityForm UtilityForm::ces() {
  UtilityForm u;
  u.kind = UtilityKind::CesRho2;
  return u;
}

UtilityForm UtilityForm::bilinear() {
  UtilityForm u;
  u.kind = UtilityKind::Bilinear;
  return u;
}

UtilityForm UtilityForm::cobb_douglas() {
  UtilityForm u;
  u.kind = UtilityKind::CobbDouglas;
  return u;
}

UtilityForm UtilityForm::custom_1d(Custom1dKind kind) {
  UtilityForm u;
  u.kind = UtilityKind::Custom1d;
  u.custom = kind;
  return u;
}

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

namespace {

void check_prices(const Vec& prices) {
  if (prices.empty()) throw std::invalid_argument("empty price vector");
  for (double p : prices)
    if (!(p > 0.0)) throw std::invalid_argument("prices must be positive");
}

}  // namespace

Domain Domain::cont_knapsack(Vec prices, double budget) {
  check_prices(prices);
  Domain d;
  d.kind = DomainKind::ContKnapsack;
  d.prices = std::move(prices);
  d.budget = budget;
  return d;
}

Domain Domain::polytope(int m, int n, Vec A, Vec rhs) {
  if (m <= 0 || n <= 0) throw std::invalid_argument("polytope dims must be positive");
  if (static_cast<int>(A.size()) != m * n || static_cast<int>(rhs.size()) != m)
    throw std::invalid_argument("polytope data dimensions disagree");
  for (double a : A)
    if (a < 0.0) throw std::invalid_argument("polytope matrix must be nonnegative");
  Domain d;
  d.kind = DomainKind::Polytope;
  d.m = m;
  d.A = std::move(A);
  d.rhs = std::move(rhs);
  d.prices.resize(n);  // only records n; unused otherwise
  return d;
}

Domain Domain::bin_knapsack(Vec prices, double budget) {
  check_prices(prices);
  Domain d;
  d.kind = DomainKind::BinKnapsack;
  d.prices = std::move(prices);
  d.budget = budget;
  return d;
}

Domain Domain::eq_knapsack(Vec prices, double budget) {
  check_prices(prices);
  if (!(budget >= 0.0)) throw std::invalid_argument("eq-knapsack budget must be nonnegative");
  Domain d;
  d.kind = DomainKind::EqKnapsack;
  d.prices = std::move(prices);
  d.budget = budget;
  return d;
}

Domain Domain::interval(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("interval requires lo < hi");
  Domain d;
  d.kind = DomainKind::Interval;
  d.lo = lo;
  d.hi = hi;
  return d;
}

int Domain::dim() const {
  switch (kind) {
    case DomainKind::Interval:
      return 1;
    case DomainKind::Polytope:
      return static_cast<int>(A.size()) / m;
    default:
      return static_cast<int>(prices.size());
  }
}

bool Domain::feasible(const Vec& x, double tol) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  switch (kind) {
    case DomainKind::ContKnapsack: {
      for (double xi : x)
        if (xi < -tol) return false;
      return dot(prices, x) <= budget + tol * (1.0 + std::abs(budget));
    }
    case DomainKind::Polytope: {
      const int n = dim();
      for (double xi : x)
        if (xi < -tol) return false;
      for (int j = 0; j < m; ++j) {
        double row = 0.0;
        for (int i = 0; i < n; ++i) row += A[j * n + i] * x[i];
        if (row > rhs[j] + tol * (1.0 + std::abs(rhs[j]))) return false;
      }
      return true;
    }
    case DomainKind::BinKnapsack: {
      for (double xi : x)
        if (std::abs(xi) > tol && std::abs(xi - 1.0) > tol) return false;
      return dot(prices, x) <= budget + tol * (1.0 + std::abs(budget));
    }
    case DomainKind::EqKnapsack: {
      for (double xi : x)
        if (xi < -tol) return false;
      return std::abs(dot(prices, x) - budget) <= tol * (1.0 + std::abs(budget));
    }
    case DomainKind::Interval:
      return x[0] >= lo - tol && x[0] <= hi + tol;
  }
  return false;
}

Vec Domain::coordinate_bounds() const {
  const int n = dim();
  Vec bound(n, 0.0);
  switch (kind) {
    case DomainKind::ContKnapsack:
    case DomainKind::BinKnapsack:
    case DomainKind::EqKnapsack:
      for (int i = 0; i < n; ++i) bound[i] = budget / prices[i];
      if (kind == DomainKind::BinKnapsack)
        for (int i = 0; i < n; ++i) bound[i] = std::min(bound[i], 1.0);
      break;
    case DomainKind::Polytope:
      for (int i = 0; i < n; ++i) {
        double b = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j)
          if (A[j * n + i] > 0.0) b = std::min(b, rhs[j] / A[j * n + i]);
        bound[i] = b;
      }
      break;
    case DomainKind::Interval:
      bound[0] = std::max(std::abs(lo), std::abs(hi));
      break;
  }
  return bound;
}

Instance make_instance(int t, UtilityForm utility, Domain domain) {
  Instance inst;
  inst.t = t;
  inst.n = domain.dim();
  if (utility.kind == UtilityKind::QuadDiag &&
      static_cast<int>(utility.quad_diag.size()) != inst.n)
    throw std::invalid_argument("quad diagonal and domain dimensions disagree");
  if (utility.kind == UtilityKind::Custom1d && domain.kind != DomainKind::Interval)
    throw std::invalid_argument("custom-1d utilities require an interval domain");
  if (domain.kind == DomainKind::Interval && utility.kind != UtilityKind::Custom1d)
    throw std::invalid_argument("interval domains require a custom-1d utility");
  inst.utility = std::move(utility);
  inst.domain = std::move(domain);
  return inst;
}

// ---------------------------------------------------------------------------
// c(.), f1, f
// ---------------------------------------------------------------------------

Vec c_map(const Vec& x, const UtilityForm& u) {
  if (!all_finite(x)) throw std::domain_error("c_map requires finite x");
  switch (u.kind) {
    case UtilityKind::QuadDiag:
    case UtilityKind::Bilinear: {
      Vec c(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) c[i] = -x[i];
      return c;
    }
    case UtilityKind::CesRho2: {
      Vec c(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] * x[i];
      return c;
    }
    case UtilityKind::CobbDouglas: {
      Vec c(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0))
          throw std::domain_error("Cobb-Douglas c_map requires strictly positive x");
        c[i] = -std::log(x[i]);
      }
      return c;
    }
    case UtilityKind::Custom1d: {
      if (x.size() != 1) throw std::domain_error("custom-1d expects a scalar action");
      if (u.custom == Custom1dKind::IndicatorAtZero)
        return Vec{x[0] == 0.0 ? -1.0 : 0.0};
      return Vec{x[0]};
    }
  }
  throw std::logic_error("unknown utility kind");
}

double f1_value(const Vec& x, const UtilityForm& u) {
  switch (u.kind) {
    case UtilityKind::QuadDiag: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += u.quad_diag[i] * x[i] * x[i];
      return 0.5 * s;
    }
    case UtilityKind::Custom1d:
      return u.custom == Custom1dKind::IndicatorAtZero ? x[0] : 0.0;
    default:
      return 0.0;
  }
}

Vec clamp_for_utility(const Vec& x, const UtilityForm& u, double floor) {
  if (u.kind != UtilityKind::CobbDouglas) return x;
  Vec out = x;
  for (double& xi : out) xi = std::max(xi, floor);
  return out;
}

double eval_f(const Vec& x, const Vec& theta, const Instance& inst) {
  if (x.size() != static_cast<std::size_t>(inst.n) ||
      theta.size() != static_cast<std::size_t>(inst.n))
    throw std::invalid_argument("eval_f dimension mismatch");
  const Vec xe = clamp_for_utility(x, inst.utility);
  return f1_value(xe, inst.utility) + dot(theta, c_map(xe, inst.utility));
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vec(std::ostream& os, const Vec& v) {
  for (double x : v) os << ' ' << fmt(x);
}

Vec read_vec(std::istream& is, int count) {
  Vec v(count);
  for (int i = 0; i < count; ++i)
    if (!(is >> v[i])) throw std::runtime_error("stream parse error: numeric field");
  return v;
}

const char* domain_tag(DomainKind k) {
  switch (k) {
    case DomainKind::ContKnapsack: return "ck";
    case DomainKind::Polytope: return "cp";
    case DomainKind::BinKnapsack: return "bk";
    case DomainKind::EqKnapsack: return "eck";
    case DomainKind::Interval: return "interval";
  }
  return "?";
}

}  // namespace

std::string to_string(UtilityKind k) {
  switch (k) {
    case UtilityKind::QuadDiag: return "quad";
    case UtilityKind::CesRho2: return "ces";
    case UtilityKind::Bilinear: return "bilinear";
    case UtilityKind::CobbDouglas: return "cobb";
    case UtilityKind::Custom1d: return "custom1d";
  }
  return "?";
}

std::string to_string(DomainKind k) { return domain_tag(k); }

std::string to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::Perfect: return "none";
    case NoiseMode::UniformSmall: return "small";
    case NoiseMode::UniformLarge: return "large";
    case NoiseMode::SuboptimalFeasible: return "subopt";
  }
  return "?";
}

UtilityKind utility_kind_from_string(const std::string& s) {
  if (s == "quad") return UtilityKind::QuadDiag;
  if (s == "ces") return UtilityKind::CesRho2;
  if (s == "bilinear") return UtilityKind::Bilinear;
  if (s == "cobb") return UtilityKind::CobbDouglas;
  if (s == "custom1d") return UtilityKind::Custom1d;
  throw std::invalid_argument("unknown utility kind: " + s);
}

DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "ck") return DomainKind::ContKnapsack;
  if (s == "cp") return DomainKind::Polytope;
  if (s == "bk") return DomainKind::BinKnapsack;
  if (s == "eck") return DomainKind::EqKnapsack;
  if (s == "interval") return DomainKind::Interval;
  throw std::invalid_argument("unknown domain kind: " + s);
}

NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "none") return NoiseMode::Perfect;
  if (s == "small") return NoiseMode::UniformSmall;
  if (s == "large") return NoiseMode::UniformLarge;
  if (s == "subopt") return NoiseMode::SuboptimalFeasible;
  throw std::invalid_argument("unknown noise mode: " + s);
}

void write_stream(std::ostream& os, const InstanceStream& s) {
  if (s.steps.empty()) throw std::invalid_argument("cannot serialize an empty stream");
  const UtilityKind uk = s.steps.front().utility.kind;
  const int n = s.steps.front().n;
  os << "prefstream 1\n";
  os << "meta utility " << to_string(uk) << " n " << n << " space ";
  if (s.theta_true.space.kind == SpaceKind::Simplex) {
    os << "simplex";
  } else {
    os << "box " << fmt(s.theta_true.space.lo) << ' ' << fmt(s.theta_true.space.hi);
  }
  os << '\n';
  os << "theta_true";
  write_vec(os, s.theta_true.values);
  os << '\n';
  if (uk == UtilityKind::QuadDiag) {
    os << "quad_diag";
    write_vec(os, s.quad_diag);
    os << '\n';
  }
  for (const Instance& inst : s.steps) {
    const Domain& d = inst.domain;
    os << "step " << inst.t << ' ' << domain_tag(d.kind);
    switch (d.kind) {
      case DomainKind::ContKnapsack:
      case DomainKind::BinKnapsack:
      case DomainKind::EqKnapsack:
        os << ' ' << inst.n;
        write_vec(os, d.prices);
        os << ' ' << fmt(d.budget);
        break;
      case DomainKind::Polytope:
        os << ' ' << inst.n << ' ' << d.m;
        write_vec(os, d.A);
        write_vec(os, d.rhs);
        break;
      case DomainKind::Interval:
        os << ' ' << fmt(d.lo) << ' ' << fmt(d.hi) << ' '
           << (inst.utility.custom == Custom1dKind::IndicatorAtZero
                   ? "indicator-at-zero"
                   : "linear-cost");
        break;
    }
    os << '\n';
  }
}

InstanceStream read_stream(std::istream& is) {
  std::string tok;
  int version = 0;
  if (!(is >> tok >> version) || tok != "prefstream" || version != 1)
    throw std::runtime_error("not a prefstream v1 file");

  std::string kw, ukind, spacekind;
  int n = 0;
  if (!(is >> kw) || kw != "meta") throw std::runtime_error("expected meta record");
  if (!(is >> kw >> ukind) || kw != "utility") throw std::runtime_error("bad meta record");
  if (!(is >> kw >> n) || kw != "n") throw std::runtime_error("bad meta record");
  if (!(is >> kw >> spacekind) || kw != "space") throw std::runtime_error("bad meta record");

  const UtilityKind uk = utility_kind_from_string(ukind);
  ParameterSpace space;
  if (spacekind == "simplex") {
    space = ParameterSpace::simplex(n);
  } else if (spacekind == "box") {
    double lo, hi;
    if (!(is >> lo >> hi)) throw std::runtime_error("bad box bounds");
    space = ParameterSpace::box(n, lo, hi);
  } else {
    throw std::runtime_error("unknown space kind: " + spacekind);
  }

  if (!(is >> kw) || kw != "theta_true") throw std::runtime_error("expected theta_true");
  InstanceStream s;
  s.theta_true = ParameterPoint(read_vec(is, n), space);

  UtilityForm base_utility;
  switch (uk) {
    case UtilityKind::QuadDiag: {
      if (!(is >> kw) || kw != "quad_diag") throw std::runtime_error("expected quad_diag");
      s.quad_diag = read_vec(is, n);
      base_utility = UtilityForm::quad(s.quad_diag);
      break;
    }
    case UtilityKind::CesRho2: base_utility = UtilityForm::ces(); break;
    case UtilityKind::Bilinear: base_utility = UtilityForm::bilinear(); break;
    case UtilityKind::CobbDouglas: base_utility = UtilityForm::cobb_douglas(); break;
    case UtilityKind::Custom1d: break;  // per-step tag
  }

  while (is >> kw) {
    if (kw != "step") throw std::runtime_error("expected step record, got " + kw);
    int t = 0;
    std::string dtag;
    if (!(is >> t >> dtag)) throw std::runtime_error("bad step record");
    const DomainKind dk = domain_kind_from_string(dtag);
    switch (dk) {
      case DomainKind::ContKnapsack:
      case DomainKind::BinKnapsack:
      case DomainKind::EqKnapsack: {
        int nn;
        if (!(is >> nn)) throw std::runtime_error("bad step record");
        Vec p = read_vec(is, nn);
        double b;
        if (!(is >> b)) throw std::runtime_error("bad step record");
        Domain d = dk == DomainKind::ContKnapsack ? Domain::cont_knapsack(p, b)
                   : dk == DomainKind::BinKnapsack ? Domain::bin_knapsack(p, b)
                                                   : Domain::eq_knapsack(p, b);
        s.steps.push_back(make_instance(t, base_utility, std::move(d)));
        break;
      }
      case DomainKind::Polytope: {
        int nn, mm;
        if (!(is >> nn >> mm)) throw std::runtime_error("bad step record");
        Vec A = read_vec(is, mm * nn);
        Vec rhs = read_vec(is, mm);
        s.steps.push_back(make_instance(
            t, base_utility, Domain::polytope(mm, nn, std::move(A), std::move(rhs))));
        break;
      }
      case DomainKind::Interval: {
        double lo, hi;
        std::string ctag;
        if (!(is >> lo >> hi >> ctag)) throw std::runtime_error("bad step record");
        const Custom1dKind ck = ctag == "indicator-at-zero"
                                    ? Custom1dKind::IndicatorAtZero
                                    : Custom1dKind::LinearCost;
        s.steps.push_back(
            make_instance(t, UtilityForm::custom_1d(ck), Domain::interval(lo, hi)));
        break;
      }
    }
  }
  if (s.steps.empty()) throw std::runtime_error("stream has no steps");
  return s;
}

}  // namespace preflearn
