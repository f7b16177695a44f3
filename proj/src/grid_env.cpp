#include "swarm_pe/grid_env.hpp"

#include <algorithm>
#include <cmath>

#include "swarm_pe/rng.hpp"

namespace swarm_pe {

namespace {

constexpr double kMassEps = 1e-6;

// offsets in canonical order: (dr, dc)
constexpr int kOffsets[9][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 0},
                                {0, 1},   {1, -1}, {1, 0},  {1, 1}};

}  // namespace

int n_actions(int n) {
  if (n < 2) throw DomainError("n_actions: grid side must be >= 2");
  return 4 * 4 + 6 * 4 * (n - 2) + 9 * (n - 2) * (n - 2);
}

Eigen::SparseMatrix<double> build_transition(
    const Eigen::Ref<const Eigen::VectorXd>& action, int n) {
  int cells = n * n;
  if (action.size() != n_actions(n))
    throw ShapeError("build_transition: expected " +
                     std::to_string(n_actions(n)) + " action entries, got " +
                     std::to_string(action.size()));
  if ((action.array() < 0.0).any())
    throw DomainError("build_transition: negative action entry");

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(action.size());
  int idx = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      int src = r * n + c;
      double column_sum = 0.0;
      int first = idx;
      for (const auto& off : kOffsets) {
        int rr = r + off[0], cc = c + off[1];
        if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
        column_sum += action[idx++];
      }
      idx = first;
      for (const auto& off : kOffsets) {
        int rr = r + off[0], cc = c + off[1];
        if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
        double w = action[idx++];
        if (column_sum > 0.0)
          entries.emplace_back(rr * n + cc, src, w / column_sum);
      }
      if (column_sum <= 0.0) entries.emplace_back(src, src, 1.0);  // hold
    }
  }

  Eigen::SparseMatrix<double> t(cells, cells);
  t.setFromTriplets(entries.begin(), entries.end());
  return t;
}

EngagementOutcome resolve_engagement(double defender_mass,
                                     double intruder_mass, double unit_scale,
                                     const CaptureTimeTable* table,
                                     PolicyKind table_policy) {
  if (defender_mass < 0.0 || intruder_mass < 0.0)
    throw DomainError("resolve_engagement: negative mass");
  EngagementOutcome out;
  if (defender_mass < kMassEps || intruder_mass < kMassEps) return out;
  out.engaged = true;
  out.ratio = defender_mass / intruder_mass;
  out.destroyed = intruder_mass * std::min(1.0, out.ratio);
  if (table)
    out.capture_score =
        table->normalized_score(table_policy, unit_scale * out.ratio);
  return out;
}

double oriented_capture_score(const CaptureTimeTable& table,
                              PolicyKind policy, double ratio) {
  double norm_time = table.normalized_score(policy, ratio);
  return 1.0 - norm_time + table.min_mean / table.t_norm;
}

void GridEnvConfig::validate() const {
  if (n < 2) throw ConfigError("grid.n must be >= 2");
  if (k_max < 1) throw ConfigError("grid.k_max must be >= 1");
  if (c_distribution < 0.0) throw ConfigError("grid.c_distribution must be >= 0");
  if (c_capture < 0.0) throw ConfigError("grid.c_capture must be >= 0");
  if (unit_scale <= 0.0) throw ConfigError("grid.unit_scale must be > 0");
  if (c_capture > 0.0 && !table)
    throw ConfigError("grid.c_capture > 0 requires a capture table");
  if (!(intruder_total > 0.0) || intruder_total > 1.0)
    throw ConfigError("grid.intruder_total must be in (0, 1]");
  int cells = n * n;
  auto check_density = [&](const Eigen::VectorXd& v, const char* name,
                           bool exact_one) {
    if (v.size() == 0) return;
    if (v.size() != cells)
      throw ConfigError(std::string("grid.") + name + " must have n*n entries");
    if ((v.array() < 0.0).any())
      throw ConfigError(std::string("grid.") + name + " has negative mass");
    double s = v.sum();
    if (exact_one ? std::abs(s - 1.0) > 1e-9 : s > 1.0 + 1e-9)
      throw ConfigError(std::string("grid.") + name + " has invalid total mass");
  };
  check_density(defender_init, "defender_init", true);
  check_density(intruder_init, "intruder_init", false);
}

GridStepResult env_step(const GridState& state,
                        const Eigen::Ref<const Eigen::VectorXd>& action,
                        const GridEnvConfig& cfg) {
  int n = cfg.n;
  int cells = n * n;
  if (state.defender.size() != cells || state.intruder.size() != cells)
    throw ShapeError("env_step: state size does not match the grid");

  GridStepResult res;
  Eigen::SparseMatrix<double> t = build_transition(action, n);
  res.state.defender = t * state.defender;

  // intruders press one column toward the left edge
  Eigen::VectorXd intruder = Eigen::VectorXd::Zero(cells);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      int dst = c == 0 ? r * n : r * n + c - 1;
      intruder[dst] += state.intruder[r * n + c];
    }
  }

  res.outcomes.resize(cells);
  double score_sum = 0.0;
  const CaptureTimeTable* table = cfg.table ? &*cfg.table : nullptr;
  for (int i = 0; i < cells; ++i) {
    EngagementOutcome out = resolve_engagement(
        res.state.defender[i], intruder[i], cfg.unit_scale, table,
        cfg.table_policy);
    if (out.engaged) {
      intruder[i] -= out.destroyed;
      if (table) {
        score_sum += out.destroyed * oriented_capture_score(
                                         *table, cfg.table_policy,
                                         cfg.unit_scale * out.ratio);
      }
    }
    res.outcomes[i] = out;
  }
  res.state.intruder = intruder;

  // capture term: destroyed mass weighted by its capture score, so its
  // episode total is bounded by the initial intruder mass and cannot be
  // farmed by stalling
  res.reward = -cfg.c_distribution * intruder.sum() + cfg.c_capture * score_sum;

  res.state.k = state.k + 1;
  double left_mass = 0.0;
  for (int r = 0; r < n; ++r) left_mass += intruder[r * n];
  res.state.leak_steps = left_mass > kMassEps ? state.leak_steps + 1 : 0;

  res.done = res.state.k >= cfg.k_max || intruder.sum() <= kMassEps;
  if (cfg.fail_on_leak && res.state.leak_steps >= 2) res.done = true;
  return res;
}

GridEnv::GridEnv(GridEnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  state_.defender = Eigen::VectorXd::Zero(cfg_.n * cfg_.n);
  state_.intruder = Eigen::VectorXd::Zero(cfg_.n * cfg_.n);
}

Eigen::VectorXd GridEnv::reset(std::uint64_t seed) {
  int n = cfg_.n;
  int cells = n * n;
  state_.k = 0;
  state_.leak_steps = 0;

  if (cfg_.defender_init.size() == cells) {
    state_.defender = cfg_.defender_init;
  } else {
    // base at the left-center cell
    state_.defender = Eigen::VectorXd::Zero(cells);
    state_.defender[(n / 2) * n] = 1.0;
  }

  if (cfg_.intruder_init.size() == cells) {
    state_.intruder = cfg_.intruder_init;
  } else {
    // random spread over the right column
    Rng rng(seed);
    Eigen::VectorXd w(n);
    for (int r = 0; r < n; ++r) w[r] = rng.uniform01();
    double s = w.sum();
    if (s <= 0.0) {
      w.setConstant(1.0);
      s = static_cast<double>(n);
    }
    state_.intruder = Eigen::VectorXd::Zero(cells);
    for (int r = 0; r < n; ++r)
      state_.intruder[r * n + (n - 1)] = cfg_.intruder_total * w[r] / s;
  }
  return observation();
}

GridStepResult GridEnv::step_detailed(
    const Eigen::Ref<const Eigen::VectorXd>& a) {
  GridStepResult res = env_step(state_, a, cfg_);
  state_ = res.state;
  return res;
}

Env::Step GridEnv::step(const Eigen::Ref<const Eigen::VectorXd>& action) {
  GridStepResult res = step_detailed(action);
  return {observation(), res.reward, res.done};
}

Eigen::VectorXd GridEnv::observation() const {
  Eigen::VectorXd obs(obs_dim());
  obs << state_.defender, state_.intruder;
  return obs;
}

}  // namespace swarm_pe
