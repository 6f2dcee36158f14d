#include "preflearn/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "preflearn/forward.hpp"

namespace preflearn {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}
}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::MdEntropy: return "md-entropy";
    case Algorithm::MdEuclid: return "md-euclid";
    case Algorithm::ImplicitSim: return "implicit-sim";
    case Algorithm::ImplicitPre: return "implicit-pre";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "md-entropy") return Algorithm::MdEntropy;
  if (s == "md-euclid") return Algorithm::MdEuclid;
  if (s == "implicit-sim") return Algorithm::ImplicitSim;
  if (s == "implicit-pre") return Algorithm::ImplicitPre;
  throw std::invalid_argument("unknown algorithm: " + s);
}

ScheduleKind default_schedule(Algorithm a) {
  switch (a) {
    case Algorithm::MdEntropy:
    case Algorithm::MdEuclid:
      return ScheduleKind::MdConstantOptimal;
    default:
      return ScheduleKind::ImplicitSqrt;
  }
}

double subgradient_bound(const InstanceStream& stream) {
  double cmax = 0.0;
  for (const Instance& inst : stream.steps) {
    const Vec bounds = inst.domain.coordinate_bounds();
    double b = 0.0;
    for (double v : bounds) b = std::max(b, v);
    switch (inst.utility.kind) {
      case UtilityKind::QuadDiag:
      case UtilityKind::Bilinear:
        cmax = std::max(cmax, b);
        break;
      case UtilityKind::CesRho2:
        cmax = std::max(cmax, b * b);
        break;
      case UtilityKind::CobbDouglas: {
        // closed form keeps x_i in [theta_floor * b_i, b_i]
        double worst = 0.0;
        for (double v : bounds)
          if (v > 0.0)
            worst = std::max(worst,
                             std::max(std::abs(std::log(kThetaFloor * v)),
                                      std::abs(std::log(v))));
        cmax = std::max(cmax, worst);
        break;
      }
      case UtilityKind::Custom1d:
        cmax = std::max(cmax, inst.utility.custom == Custom1dKind::IndicatorAtZero
                                  ? 1.0
                                  : b);
        break;
    }
  }
  return 2.0 * cmax;
}

namespace {

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.gen.instance_count <= 0 || cfg.gen.T <= 0)
    throw std::invalid_argument("instances and T must be positive");
  const bool interval = cfg.gen.domain == DomainKind::Interval;
  switch (cfg.algo) {
    case Algorithm::MdEntropy:
      if (interval)
        throw std::invalid_argument("md-entropy requires a simplex parameter space");
      break;
    case Algorithm::ImplicitSim:
      if (interval)
        throw std::invalid_argument("implicit-sim requires a simplex parameter space");
      break;
    case Algorithm::ImplicitPre:
      if (!interval) {
        if (cfg.gen.utility != UtilityKind::QuadDiag)
          throw std::invalid_argument("implicit-pre requires the quad utility");
        if (cfg.gen.domain != DomainKind::ContKnapsack &&
            cfg.gen.domain != DomainKind::Polytope)
          throw std::invalid_argument("implicit-pre requires a continuous domain");
        if (cfg.gen.n > cfg.pre_options.n_cap)
          throw std::invalid_argument("implicit-pre requires n <= " +
                                      std::to_string(cfg.pre_options.n_cap));
      }
      break;
    case Algorithm::MdEuclid:
      break;
  }
  if (cfg.schedule == ScheduleKind::Custom &&
      static_cast<int>(cfg.custom_steps.size()) < cfg.gen.T)
    throw std::invalid_argument("custom schedule shorter than the horizon");
}

StepSchedule build_schedule(const ExperimentConfig& cfg, const ProxSetup& md_setup,
                            double G) {
  switch (cfg.schedule) {
    case ScheduleKind::MdConstantPaper:
      return StepSchedule::md_constant_paper(md_setup.omega, G, cfg.gen.T);
    case ScheduleKind::MdConstantOptimal:
      return StepSchedule::md_constant_optimal(md_setup.omega, G, cfg.gen.T);
    case ScheduleKind::ImplicitSqrt: {
      // Euclidean set width: 1 on the simplex, p w^2 / 2 on a box
      const double omega_hat =
          md_setup.space.kind == SpaceKind::Simplex
              ? 1.0
              : 0.5 * md_setup.space.dim *
                    (md_setup.space.hi - md_setup.space.lo) *
                    (md_setup.space.hi - md_setup.space.lo);
      return StepSchedule::implicit_sqrt(omega_hat, G);
    }
    case ScheduleKind::Custom:
      return StepSchedule::custom_steps(cfg.custom_steps);
  }
  throw std::logic_error("unknown schedule kind");
}

InstanceResult run_one_instance(const ExperimentConfig& cfg, int index,
                                const InstanceStream* preloaded) {
  InstanceResult out;
  out.index = index;

  const InstanceStream stream =
      preloaded ? *preloaded : gen_instance_stream(cfg.gen, index);
  const int T = static_cast<int>(stream.steps.size());
  const ParameterPoint& theta_true = stream.theta_true;
  const ParameterSpace space = theta_true.space;
  const InfoMode mode =
      cfg.gen.noise == NoiseMode::Perfect ? InfoMode::Perfect : InfoMode::Noisy;

  // true actions, never timed
  std::vector<Vec> true_actions(T);
  for (int t = 0; t < T; ++t) {
    const ForwardSolution sol = solve_forward(theta_true, stream.steps[t]);
    if (sol.status != SolveStatus::Optimal) {
      out.diagnostic = "true-action solve failed at t=" + std::to_string(t + 1);
      return out;
    }
    true_actions[t] = sol.x;
  }
  const std::vector<Observation> obs =
      apply_noise(true_actions, stream.steps, cfg.gen.noise, cfg.gen.seed, index);

  const double G = subgradient_bound(stream);

  ParameterPoint theta;
  ProxSetup setup;
  if (space.kind == SpaceKind::Simplex) {
    theta = uniform_simplex_point(space.dim);
    setup = make_prox_setup(cfg.algo == Algorithm::MdEntropy ? Geometry::EntropySimplex
                                                             : Geometry::EuclidSimplex,
                            space, G);
  } else {
    const double init =
        std::isnan(cfg.theta_init_box) ? space.hi : cfg.theta_init_box;
    theta = ParameterPoint(Vec(space.dim, init), space);
    setup = make_prox_setup(Geometry::EuclidBox, space, G);
  }
  const StepSchedule schedule = build_schedule(cfg, setup, G);

  out.records.reserve(T);
  if (mode == InfoMode::Noisy) out.records_attrue.reserve(T);
  Vec step_ms(T, 0.0);

  for (int t = 1; t <= T; ++t) {
    const Instance& inst = stream.steps[t - 1];
    const Observation& ob = obs[t - 1];
    ForwardSolution pred;
    ParameterPoint theta_next;

    try {
      switch (cfg.algo) {
        case Algorithm::MdEntropy:
        case Algorithm::MdEuclid: {
          const auto t0 = Clock::now();
          pred = solve_forward(theta, inst);
          const Vec s = sim_subgradient(pred.x, ob.y, inst.utility);
          theta_next = md_step(theta, s, t, schedule, setup);
          step_ms[t - 1] = ms_since(t0);
          break;
        }
        case Algorithm::ImplicitSim: {
          const auto t0 = Clock::now();
          pred = solve_forward(theta, inst);
          const Vec s = sim_subgradient(pred.x, ob.y, inst.utility);
          theta_next = implicit_sim_step(theta, s, t, schedule);
          step_ms[t - 1] = ms_since(t0);
          break;
        }
        case Algorithm::ImplicitPre: {
          pred = solve_forward(theta, inst);  // evaluator bookkeeping, untimed
          const auto t0 = Clock::now();
          const PreStepResult res =
              implicit_pre_step(theta, step_value(schedule, t), inst, ob.y,
                                cfg.pre_options);
          step_ms[t - 1] = ms_since(t0);
          theta_next = res.theta_next;
          break;
        }
      }
      out.records.push_back(
          eval_losses_with_pred(theta, inst, ob, theta_true, pred));
      if (mode == InfoMode::Noisy)
        out.records_attrue.push_back(eval_losses_with_pred(
            theta, inst, Observation{true_actions[t - 1], NoiseMode::Perfect},
            theta_true, pred));
    } catch (const std::exception& e) {
      out.diagnostic = "step t=" + std::to_string(t) + ": " + e.what();
      return out;
    }
    theta = theta_next;
  }

  const OfflineMinima offline =
      compute_offline_minima(out.records, space, theta_true, mode);
  out.trace = build_regret_trace(out.records, offline);
  out.trace.step_ms = std::move(step_ms);
  out.completed = true;
  return out;
}

std::string perfect_mode_record_check(const InstanceResult& run) {
  for (const LossRecord& r : run.records) {
    if (r.l_pre < -1e-8 || r.l_sub < -1e-8 || r.l_est < -1e-8)
      return "negative loss at t=" + std::to_string(r.t);
    if (std::abs(r.l_sim - (r.l_sub + r.l_est)) > 1e-7)
      return "simple-loss identity violated at t=" + std::to_string(r.t);
  }
  return {};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

namespace {

ExperimentResult run_experiment_impl(const ExperimentConfig& cfg,
                                     const std::vector<InstanceStream>* streams) {
  validate_config(cfg);
  const int count =
      streams ? static_cast<int>(streams->size()) : cfg.gen.instance_count;
  ExperimentResult result;
  result.config = cfg;
  result.instances.resize(count);

  auto stream_at = [&](int k) {
    return streams ? &(*streams)[k] : nullptr;
  };
  const int jobs = std::max(1, std::min(cfg.jobs, count));
  if (jobs == 1) {
    for (int k = 0; k < count; ++k)
      result.instances[k] = run_one_instance(cfg, k, stream_at(k));
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int k = next.fetch_add(1); k < count; k = next.fetch_add(1))
        result.instances[k] = run_one_instance(cfg, k, stream_at(k));
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  for (const InstanceResult& run : result.instances) {
    if (!run.completed) {
      result.invariants_ok = false;
      result.invariant_failures.push_back("instance " + std::to_string(run.index) +
                                          " aborted: " + run.diagnostic);
      continue;
    }
    if (cfg.gen.noise == NoiseMode::Perfect) {
      std::string err = perfect_mode_record_check(run);
      if (err.empty()) err = check_regret_relations(run.trace);
      if (!err.empty()) {
        result.invariants_ok = false;
        result.invariant_failures.push_back("instance " + std::to_string(run.index) +
                                            ": " + err);
      }
    }
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return run_experiment_impl(cfg, nullptr);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::vector<InstanceStream>& streams) {
  return run_experiment_impl(cfg, &streams);
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

namespace {

struct MetricColumn {
  std::string name;
  // value for instance `run` at step index `t`
  std::function<double(const InstanceResult&, int)> value;
};

// prefix average of per-step attrue losses
double attrue_prefix_avg(const InstanceResult& run, int t,
                         double LossRecord::*field) {
  double s = 0.0;
  for (int i = 0; i <= t; ++i) s += run.records_attrue[i].*field;
  return s / static_cast<double>(t + 1);
}

std::vector<MetricColumn> metric_columns(const ExperimentResult& result) {
  std::vector<MetricColumn> cols;
  auto trace_metric = [](std::string name, Vec RegretTrace::*series) {
    return MetricColumn{std::move(name), [series](const InstanceResult& r, int t) {
                          return (r.trace.*series)[t];
                        }};
  };
  cols.push_back(trace_metric("avg_regret_pre", &RegretTrace::avg_regret_pre));
  cols.push_back(trace_metric("avg_regret_sub", &RegretTrace::avg_regret_sub));
  cols.push_back(trace_metric("avg_regret_est", &RegretTrace::avg_regret_est));
  cols.push_back(trace_metric("avg_regret_sim", &RegretTrace::avg_regret_sim));
  auto avg_loss = [](std::string name, Vec RegretTrace::*series) {
    return MetricColumn{std::move(name), [series](const InstanceResult& r, int t) {
                          return (r.trace.*series)[t] / static_cast<double>(t + 1);
                        }};
  };
  cols.push_back(avg_loss("avg_loss_pre", &RegretTrace::cum_pre));
  cols.push_back(avg_loss("avg_loss_sub", &RegretTrace::cum_sub));
  cols.push_back(avg_loss("avg_loss_est", &RegretTrace::cum_est));
  cols.push_back(avg_loss("avg_loss_sim", &RegretTrace::cum_sim));
  cols.push_back(trace_metric("step_ms", &RegretTrace::step_ms));
  if (result.config.gen.noise != NoiseMode::Perfect) {
    auto attrue = [](std::string name, double LossRecord::*field) {
      return MetricColumn{std::move(name), [field](const InstanceResult& r, int t) {
                            return attrue_prefix_avg(r, t, field);
                          }};
    };
    cols.push_back(attrue("avg_loss_pre_attrue", &LossRecord::l_pre));
    cols.push_back(attrue("avg_loss_sub_attrue", &LossRecord::l_sub));
    cols.push_back(attrue("avg_loss_est_attrue", &LossRecord::l_est));
    cols.push_back(attrue("avg_loss_sim_attrue", &LossRecord::l_sim));
  }
  return cols;
}

}  // namespace

Summary aggregate(const ExperimentResult& result) {
  Summary summary;
  std::vector<const InstanceResult*> done;
  for (const InstanceResult& r : result.instances)
    if (r.completed) done.push_back(&r);
  summary.k = static_cast<int>(done.size());
  if (done.empty()) {
    summary.warnings.push_back("no completed instances to aggregate");
    return summary;
  }
  summary.T = static_cast<int>(done.front()->records.size());
  if (summary.k < 2)
    summary.warnings.push_back(
        "confidence bands omitted: need at least 2 instances");

  for (const MetricColumn& col : metric_columns(result)) {
    SummarySeries series;
    series.metric = col.name;
    series.mean.assign(summary.T, kNan);
    series.lo.assign(summary.T, kNan);
    series.hi.assign(summary.T, kNan);
    bool any_finite = false;
    for (int t = 0; t < summary.T; ++t) {
      double sum = 0.0;
      int count = 0;
      for (const InstanceResult* r : done) {
        const double v = col.value(*r, t);
        if (std::isnan(v)) continue;
        sum += v;
        ++count;
      }
      if (count == 0) continue;
      const double mean = sum / count;
      series.mean[t] = mean;
      any_finite = true;
      if (count >= 2) {
        double ss = 0.0;
        for (const InstanceResult* r : done) {
          const double v = col.value(*r, t);
          if (std::isnan(v)) continue;
          ss += (v - mean) * (v - mean);
        }
        const double half = 1.96 * std::sqrt(ss / (count - 1)) / std::sqrt(count);
        series.lo[t] = mean - half;
        series.hi[t] = mean + half;
      }
    }
    if (!any_finite) {
      summary.warnings.push_back("metric " + col.name +
                                 " unavailable in this mode; omitted");
      continue;
    }
    summary.series.push_back(std::move(series));
  }
  return summary;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::vector<std::string> write_records_csv(std::ostream& os,
                                           const ExperimentResult& result) {
  std::vector<std::string> warnings;
  const bool noisy = result.config.gen.noise != NoiseMode::Perfect;

  std::vector<std::string> header = {"instance", "t",        "loss_pre",
                                     "loss_sub", "loss_est", "loss_sim"};
  if (noisy) {
    warnings.push_back(
        "avg_regret_pre/sub/est unavailable under noise; columns omitted");
    header.push_back("avg_regret_sim");
  } else {
    header.insert(header.end(), {"avg_regret_pre", "avg_regret_sub",
                                 "avg_regret_est", "avg_regret_sim"});
  }
  header.push_back("step_ms");
  if (noisy)
    header.insert(header.end(), {"loss_pre_attrue", "loss_sub_attrue",
                                 "loss_est_attrue", "loss_sim_attrue"});

  for (std::size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 == header.size() ? '\n' : ',');

  for (const InstanceResult& run : result.instances) {
    if (!run.completed) continue;
    for (std::size_t t = 0; t < run.records.size(); ++t) {
      const LossRecord& r = run.records[t];
      os << run.index << ',' << r.t << ',' << fmt(r.l_pre) << ',' << fmt(r.l_sub)
         << ',' << fmt(r.l_est) << ',' << fmt(r.l_sim);
      if (!noisy)
        os << ',' << fmt(run.trace.avg_regret_pre[t]) << ','
           << fmt(run.trace.avg_regret_sub[t]) << ','
           << fmt(run.trace.avg_regret_est[t]);
      os << ',' << fmt(run.trace.avg_regret_sim[t]);
      os << ',' << fmt(run.trace.step_ms[t]);
      if (noisy) {
        const LossRecord& a = run.records_attrue[t];
        os << ',' << fmt(a.l_pre) << ',' << fmt(a.l_sub) << ',' << fmt(a.l_est)
           << ',' << fmt(a.l_sim);
      }
      os << '\n';
    }
  }
  return warnings;
}

void write_summary_csv(std::ostream& os, const Summary& summary) {
  os << "metric,t,mean,lo,hi\n";
  for (const SummarySeries& s : summary.series) {
    for (int t = 0; t < summary.T; ++t) {
      if (std::isnan(s.mean[t])) continue;
      os << s.metric << ',' << (t + 1) << ',' << fmt(s.mean[t]) << ',';
      if (!std::isnan(s.lo[t])) os << fmt(s.lo[t]);
      os << ',';
      if (!std::isnan(s.hi[t])) os << fmt(s.hi[t]);
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Transform {
  double x0, x1, y0, y1;  // data ranges
  int width, height, ml = 64, mr = 16, mt = 18, mb = 40;
  double px(double x) const {
    return ml + (x - x0) / (x1 - x0) * (width - ml - mr);
  }
  double py(double y) const {
    return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb);
  }
};

}  // namespace

void write_summary_svg(std::ostream& os, const Summary& summary,
                       const std::vector<std::string>& metrics,
                       const SvgOptions& opts) {
  std::vector<const SummarySeries*> plotted;
  for (const std::string& m : metrics)
    for (const SummarySeries& s : summary.series)
      if (s.metric == m) plotted.push_back(&s);

  bool clamped = false;
  auto yval = [&](double v) {
    if (!opts.log_scale) return v;
    if (v < opts.floor) {
      clamped = true;
      return std::log10(opts.floor);
    }
    return std::log10(v);
  };

  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const SummarySeries* s : plotted)
    for (int t = 0; t < summary.T; ++t) {
      if (std::isnan(s->mean[t])) continue;
      for (double v : {s->mean[t], s->lo[t], s->hi[t]}) {
        if (std::isnan(v)) continue;
        const double y = yval(v);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (!(ymin < ymax)) {
    ymin = plotted.empty() || !std::isfinite(ymin) ? 0.0 : ymin - 0.5;
    ymax = ymin + 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  Transform tr{1.0, static_cast<double>(std::max(2, summary.T)), ymin - pad,
               ymax + pad, opts.width, opts.height};

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
     << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width << ' '
     << opts.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g class=\"plot\"";
  if (opts.log_scale) os << " data-scale=\"log10\"";
  os << " data-floor=\"" << fmt(opts.floor) << "\">\n";

  // axes
  os << "<line x1=\"" << tr.ml << "\" y1=\"" << tr.py(tr.y0) << "\" x2=\""
     << tr.px(tr.x1) << "\" y2=\"" << tr.py(tr.y0)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << tr.ml << "\" y1=\"" << tr.py(tr.y0) << "\" x2=\"" << tr.ml
     << "\" y2=\"" << tr.py(tr.y1) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double xt = tr.x0 + (tr.x1 - tr.x0) * tick / 4.0;
    os << "<text x=\"" << tr.px(xt) << "\" y=\"" << opts.height - tr.mb + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << static_cast<int>(xt)
       << "</text>\n";
    const double yt = tr.y0 + (tr.y1 - tr.y0) * tick / 4.0;
    char label[48];
    if (opts.log_scale)
      std::snprintf(label, sizeof(label), "1e%.2f", yt);
    else
      std::snprintf(label, sizeof(label), "%.4g", yt);
    os << "<text x=\"" << tr.ml - 6 << "\" y=\"" << tr.py(yt) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << label << "</text>\n";
  }
  os << "<text x=\"" << (tr.ml + tr.px(tr.x1)) / 2 << "\" y=\""
     << opts.height - 8 << "\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";

  int color = 0;
  for (const SummarySeries* s : plotted) {
    const char* c = kPalette[color % 8];
    // confidence band
    bool has_band = false;
    for (int t = 0; t < summary.T; ++t)
      if (!std::isnan(s->lo[t])) has_band = true;
    if (has_band) {
      os << "<polygon fill=\"" << c << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (int t = 0; t < summary.T; ++t)
        if (!std::isnan(s->lo[t]))
          os << tr.px(t + 1) << ',' << tr.py(yval(s->lo[t])) << ' ';
      for (int t = summary.T - 1; t >= 0; --t)
        if (!std::isnan(s->hi[t]))
          os << tr.px(t + 1) << ',' << tr.py(yval(s->hi[t])) << ' ';
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (int t = 0; t < summary.T; ++t)
      if (!std::isnan(s->mean[t]))
        os << tr.px(t + 1) << ',' << tr.py(yval(s->mean[t])) << ' ';
    os << "\"/>\n";
    // legend entry
    const int ly = tr.mt + 16 * color;
    os << "<rect x=\"" << opts.width - 190 << "\" y=\"" << ly
       << "\" width=\"10\" height=\"10\" fill=\"" << c << "\"/>\n";
    os << "<text x=\"" << opts.width - 175 << "\" y=\"" << ly + 9
       << "\" font-size=\"11\">" << s->metric << "</text>\n";
    ++color;
  }
  if (clamped)
    os << "<text x=\"" << opts.width - 190 << "\" y=\"" << tr.mt + 16 * color + 9
       << "\" font-size=\"10\" fill=\"#555\">values clamped to " << fmt(opts.floor)
       << " floor</text>\n";
  os << "</g>\n</svg>\n";
}

std::vector<std::string> emit(const ExperimentResult& result, const Summary& summary,
                              const std::string& out_dir, const EmitOptions& opts) {
  namespace fs = std::filesystem;
  std::vector<std::string> warnings = summary.warnings;
  fs::create_directories(out_dir);

  {
    std::ofstream os(fs::path(out_dir) / "records.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + out_dir + "/records.csv");
    auto w = write_records_csv(os, result);
    warnings.insert(warnings.end(), w.begin(), w.end());
  }
  {
    std::ofstream os(fs::path(out_dir) / "summary.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + out_dir + "/summary.csv");
    write_summary_csv(os, summary);
  }
  if (opts.plots) {
    SvgOptions svg;
    svg.log_scale = opts.log_scale;
    auto plot = [&](const std::string& name, const std::vector<std::string>& metrics) {
      bool any = false;
      for (const SummarySeries& s : summary.series)
        for (const std::string& m : metrics)
          if (s.metric == m) any = true;
      if (!any) return;
      std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + out_dir + "/" + name);
      write_summary_svg(os, summary, metrics, svg);
    };
    plot("regret.svg", {"avg_regret_pre", "avg_regret_sub", "avg_regret_est",
                        "avg_regret_sim"});
    plot("loss.svg", {"avg_loss_pre", "avg_loss_sub", "avg_loss_est", "avg_loss_sim"});
    plot("loss_attrue.svg", {"avg_loss_pre_attrue", "avg_loss_sub_attrue",
                             "avg_loss_est_attrue", "avg_loss_sim_attrue"});
  }
  return warnings;
}

}  // namespace preflearn
