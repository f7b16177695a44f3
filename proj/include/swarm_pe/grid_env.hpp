#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <vector>

#include "swarm_pe/env.hpp"
#include "swarm_pe/monte_carlo.hpp"

namespace swarm_pe {

// Action count for an N x N grid under self + orthogonal + diagonal moves:
// 4*4 + 6*4(N-2) + 9(N-2)^2.
int n_actions(int n);

// Column-stochastic transition matrix from raw action weights. Entries are
// laid out row-major over source cells, neighbor offsets ordered
// (-1,-1),(-1,0),(-1,+1),(0,-1),(0,0),(0,+1),(+1,-1),(+1,0),(+1,+1) with
// off-grid offsets skipped. Each column is normalized by its sum; an
// all-zero column falls back to a self-transition of 1.
Eigen::SparseMatrix<double> build_transition(
    const Eigen::Ref<const Eigen::VectorXd>& action, int n);

struct GridState {
  Eigen::VectorXd defender;  // sums to 1
  Eigen::VectorXd intruder;  // sum <= 1, mass destroyed by engagements
  int k = 0;
  int leak_steps = 0;  // consecutive steps with intruder mass on column 0
};

struct EngagementOutcome {
  bool engaged = false;
  double ratio = 0.0;          // defender mass / intruder mass
  double capture_score = 0.0;  // normalized capture time from the table
  double destroyed = 0.0;      // intruder mass removed
};

// Per-cell engagement: mass-for-mass attrition plus a capture-time score
// looked up at unit_scale * mass ratio (clamped to the table's knots).
// Masses below 1e-6 do not engage.
EngagementOutcome resolve_engagement(double defender_mass,
                                     double intruder_mass, double unit_scale,
                                     const CaptureTimeTable* table,
                                     PolicyKind table_policy);

struct GridEnvConfig {
  int n = 3;
  int k_max = 8;
  double c_distribution = 1.0;
  double c_capture = 0.0;
  double unit_scale = 1.0;  // pursuer-per-evader ratio per unit mass ratio
  PolicyKind table_policy = PolicyKind::PureDistance;
  std::optional<CaptureTimeTable> table;
  bool fail_on_leak = false;  // end episodes that let mass sit on column 0
  double intruder_total = 1.0;
  // initial densities; empty means defender one-hot at the left-center cell
  // and intruder mass drawn uniformly over the right column on reset
  Eigen::VectorXd defender_init;
  Eigen::VectorXd intruder_init;

  void validate() const;
};

struct GridStepResult {
  GridState state;
  double reward = 0.0;
  bool done = false;
  std::vector<EngagementOutcome> outcomes;  // one per cell
};

// One MDP step: defender flows through the transition matrix, intruders
// shift one column left (mass piles up at the left edge), co-occupied cells
// resolve engagements, reward combines the remaining intruder mass with the
// capture scores of this step's engagements.
GridStepResult env_step(const GridState& state,
                        const Eigen::Ref<const Eigen::VectorXd>& action,
                        const GridEnvConfig& cfg);

// Larger for faster capture; affine in the table's normalized time so that
// it stays in (0, 1]: 1 - mean/t_norm + min_mean/t_norm.
double oriented_capture_score(const CaptureTimeTable& table,
                              PolicyKind policy, double ratio);

// Stateful wrapper with the step-then-observe contract used by the trainer.
// The observation is [defender; intruder].
class GridEnv : public Env {
 public:
  explicit GridEnv(GridEnvConfig cfg);

  int obs_dim() const override { return 2 * cfg_.n * cfg_.n; }
  int action_dim() const override { return n_actions(cfg_.n); }

  Eigen::VectorXd reset(std::uint64_t seed) override;
  Step step(const Eigen::Ref<const Eigen::VectorXd>& action) override;

  GridStepResult step_detailed(const Eigen::Ref<const Eigen::VectorXd>& a);
  Eigen::VectorXd observation() const;

  const GridState& state() const { return state_; }
  const GridEnvConfig& config() const { return cfg_; }

 private:
  GridEnvConfig cfg_;
  GridState state_;
};

}  // namespace swarm_pe
