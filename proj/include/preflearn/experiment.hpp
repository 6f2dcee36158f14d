#pragma once

// Experiment orchestration: run one (algorithm, utility, domain, noise)
// configuration over a batch of instances, aggregate mean curves with 95%
// confidence bands, and emit CSV and SVG outputs.
//
// Timing convention: computing the true action x(theta_true; u_t) is never
// timed. The mirror-descent step time covers the forward solve at theta_t,
// the subgradient, and the prox update. The implicit simple-loss step time
// covers invoking its solution oracle, including materializing the step's
// loss data (the forward solve at theta_t). The prediction-loss step time
// covers the branch-and-bound oracle alone; its x(theta_t; u_t) is evaluator
// bookkeeping, solved untimed.

#include <iosfwd>
#include <string>

#include "preflearn/bilevel.hpp"
#include "preflearn/instance_gen.hpp"
#include "preflearn/losses.hpp"
#include "preflearn/oco.hpp"

namespace preflearn {

enum class Algorithm { MdEntropy, MdEuclid, ImplicitSim, ImplicitPre };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct ExperimentConfig {
  GenConfig gen;
  Algorithm algo = Algorithm::MdEntropy;
  ScheduleKind schedule = ScheduleKind::MdConstantOptimal;
  Vec custom_steps;        // ScheduleKind::Custom
  double theta_init_box =
      std::numeric_limits<double>::quiet_NaN();  // box-space start, default hi
  int jobs = 1;
  PreStepOptions pre_options;
};

/// Default schedule per algorithm: constant-optimal for mirror descent,
/// 1/sqrt(t) for the implicit updates.
ScheduleKind default_schedule(Algorithm a);

/// Batch subgradient bound: G = 2 max_t max over the domain of ||c(x)||_inf,
/// from the per-coordinate domain bounds.
double subgradient_bound(const InstanceStream& stream);

struct InstanceResult {
  int index = 0;
  bool completed = false;
  std::string diagnostic;
  std::vector<LossRecord> records;
  std::vector<LossRecord> records_attrue;  // noisy runs: y replaced by the true action
  RegretTrace trace;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<InstanceResult> instances;
  bool invariants_ok = true;
  std::vector<std::string> invariant_failures;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Replay path: runs the learner on pre-loaded streams (one instance per
/// stream) instead of generating them; cfg.gen supplies the noise mode and
/// seed. Horizon and dimensions come from the streams.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::vector<InstanceStream>& streams);

// ---------------------------------------------------------------------------
// Aggregation and output
// ---------------------------------------------------------------------------

struct SummarySeries {
  std::string metric;
  Vec mean, lo, hi;  // lo/hi are NaN when bands are unavailable
};

struct Summary {
  int T = 0;
  int k = 0;  // instances aggregated
  std::vector<SummarySeries> series;
  std::vector<std::string> warnings;
};

/// Per-t mean across completed instances plus mean +- 1.96 * std / sqrt(k)
/// bands. Metrics: avg_regret_*, avg_loss_* (cumulative/t), step_ms, and the
/// *_attrue averages on noisy runs. All-NaN metrics are dropped with a
/// warning; a single instance drops the bands with a warning.
Summary aggregate(const ExperimentResult& result);

/// Per-(instance, t) CSV. Header in perfect mode:
///   instance,t,loss_pre,loss_sub,loss_est,loss_sim,avg_regret_pre,
///   avg_regret_sub,avg_regret_est,avg_regret_sim,step_ms
/// Noisy mode omits the unavailable regret columns (with a warning) and
/// appends loss_*_attrue columns.
std::vector<std::string> write_records_csv(std::ostream& os,
                                           const ExperimentResult& result);

void write_summary_csv(std::ostream& os, const Summary& summary);

struct SvgOptions {
  bool log_scale = true;
  double floor = 1e-12;  // log-scale clamp for nonpositive values
  int width = 860, height = 520;
};

/// Line plot of the given metrics; clamped values are flagged via a
/// data-floor attribute on the plot group and a legend note.
void write_summary_svg(std::ostream& os, const Summary& summary,
                       const std::vector<std::string>& metrics,
                       const SvgOptions& opts = {});

struct EmitOptions {
  bool plots = false;
  bool log_scale = true;
};

/// Writes records.csv, summary.csv and (optionally) SVG plots under out_dir;
/// returns accumulated warnings.
std::vector<std::string> emit(const ExperimentResult& result, const Summary& summary,
                              const std::string& out_dir, const EmitOptions& opts);

}  // namespace preflearn
