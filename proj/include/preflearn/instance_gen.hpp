#pragma once

// Reproducible generation of the experimental instance streams and the noise
// models. All draws come from counter-based streams keyed by
// (seed, instance, tag, t), so batches can be generated and consumed in
// parallel without order dependence.

#include <cstdint>

#include "preflearn/types.hpp"

namespace preflearn {

struct GenConfig {
  int n = 50;
  int m = 10;
  int T = 500;
  int instance_count = 50;
  DomainKind domain = DomainKind::ContKnapsack;
  UtilityKind utility = UtilityKind::QuadDiag;
  std::uint64_t seed = 0;
  NoiseMode noise = NoiseMode::Perfect;
};

/// One instance's stream: theta_true drawn uniformly from [1,1000]^n and
/// l1-normalized; quad diagonals from [1,21] and l1-normalized; per step
/// p_t = theta_true + 100*1 + r with r integer uniform on [-10,10]^n and
/// b_t uniform on [1, sum p_t]; polytope rows generated like p_t with
/// rhs_j uniform on [1, row sum]. Binary domains round p_t to integers.
/// Interval domains produce the scripted 1-d stream (theta_true = 0 in the
/// box [-3,3], action interval [-1,1], indicator utility pair).
InstanceStream gen_instance_stream(const GenConfig& cfg, int instance_index);

/// Euclidean noise scale delta = (1/T) sum_t ||x_t||_2.
double noise_scale_delta(const std::vector<Vec>& true_actions);

/// Per-coordinate uniform noise at the mode's range (small: delta/n, large:
/// delta), or the suboptimal-feasible mixture y = (1-beta) x + beta z with z
/// a random feasible point and beta uniform on [0, 0.2]. Requires all true
/// actions up front because delta needs the full pass.
std::vector<Observation> apply_noise(const std::vector<Vec>& true_actions,
                                     const std::vector<Instance>& steps,
                                     NoiseMode mode, std::uint64_t seed,
                                     int instance_index);

/// A random feasible point of the step's domain (used by the suboptimal
/// noise model; continuous domains only).
Vec random_feasible_point(const Domain& dom, std::uint64_t seed, int instance_index,
                          int t);

}  // namespace preflearn
