#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarm_pe/pe_game.hpp"

namespace swarm_pe {

struct Box2 {
  double x_lo, x_hi, y_lo, y_hi;
};

struct McConfig {
  int n_runs = 50;
  int n_pursuers = 1;
  int n_evaders = 1;
  Box2 pursuer_box{3.0, 5.0, 0.0, 10.0};
  Box2 evader_box{7.0, 9.0, 0.0, 10.0};
  PolicyKind pursuer_policy = PolicyKind::AreaMin;
  PolicyKind evader_policy = PolicyKind::ConstantArea;
  Point2 evader_target{5.0, 5.0};  // MoveToTarget evaders run for this point
  std::uint64_t base_seed = 0;
  GameConfig game;  // domain and physics; the roster is sampled per run

  void validate() const;
};

// Uniform i.i.d. initial conditions in the per-role boxes, resampling any
// position that lands within 1e-6 of an already placed agent. Deterministic
// in (base_seed, run_index), independent across runs.
std::vector<Agent> sample_initial(const McConfig& cfg, int run_index);

struct CaptureStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 when fewer than 2
  double min_time = 0.0;
  double max_time = 0.0;
  int n_runs = 0;
  int captured = 0;
  int timeout_count = 0;

  bool empty() const { return captured == 0; }
};

// Aggregation over capture times of completed runs; timeouts are counted,
// never averaged in.
CaptureStats compute_stats(const std::vector<double>& times, int timeouts);

// Per-run episode capture time (time of the last capture) or nullopt on
// timeout. Runs execute in parallel but land in run-index order.
std::vector<std::optional<double>> mc_capture_times(const McConfig& cfg);

CaptureStats run_mc(const McConfig& cfg);

struct CaptureTableEntry {
  PolicyKind policy;
  int ratio;  // pursuers per evader
  CaptureStats stats;
};

// Capture-time lookup built from one Monte-Carlo suite per (policy, ratio)
// cell. Scores are normalized by the largest mean in the table so they fall
// in (0, 1]; ratio queries interpolate piecewise-linearly between knots and
// clamp at the ends.
struct CaptureTimeTable {
  std::vector<CaptureTableEntry> entries;
  double t_norm = 0.0;    // max mean across cells
  double min_mean = 0.0;  // min mean across cells

  double interpolate_mean(PolicyKind policy, double ratio) const;
  // interpolated mean / t_norm, in (0, 1]
  double normalized_score(PolicyKind policy, double ratio) const;

  std::string to_json() const;
  static CaptureTimeTable from_json(const std::string& text);
};

// One run_mc per (policy, ratio) cell. The evader side mirrors the pursuit
// policy: pure-distance suites face a move-to-target evader, area-min
// suites a constant-area evader.
CaptureTimeTable build_capture_table(const std::vector<PolicyKind>& policies,
                                     const std::vector<int>& ratios,
                                     const McConfig& base);

// Cell configuration used by build_capture_table, exposed for tests.
McConfig table_cell_config(const McConfig& base, PolicyKind policy, int ratio,
                           std::uint64_t cell_index);

}  // namespace swarm_pe
