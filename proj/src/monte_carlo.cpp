#include "swarm_pe/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "swarm_pe/io.hpp"
#include "swarm_pe/parallel.hpp"
#include "swarm_pe/rng.hpp"

namespace swarm_pe {

namespace {

bool box_in_domain(const Box2& b, const ConvexPolygon& domain) {
  return domain.contains({b.x_lo, b.y_lo}) && domain.contains({b.x_hi, b.y_lo}) &&
         domain.contains({b.x_hi, b.y_hi}) && domain.contains({b.x_lo, b.y_hi});
}

}  // namespace

void McConfig::validate() const {
  if (n_runs < 1) throw ConfigError("montecarlo.n_runs must be >= 1");
  if (n_pursuers < 1) throw ConfigError("montecarlo.n_pursuers must be >= 1");
  if (n_evaders < 1) throw ConfigError("montecarlo.n_evaders must be >= 1");
  if (pursuer_box.x_lo > pursuer_box.x_hi || pursuer_box.y_lo > pursuer_box.y_hi)
    throw ConfigError("montecarlo.pursuer_box is empty");
  if (evader_box.x_lo > evader_box.x_hi || evader_box.y_lo > evader_box.y_hi)
    throw ConfigError("montecarlo.evader_box is empty");
  if (!box_in_domain(pursuer_box, game.domain))
    throw ConfigError("montecarlo.pursuer_box outside the game domain");
  if (!box_in_domain(evader_box, game.domain))
    throw ConfigError("montecarlo.evader_box outside the game domain");
  if (!policy_valid_for(Role::Pursuer, pursuer_policy))
    throw ConfigError("montecarlo.pursuer_policy is not a pursuer policy");
  if (!policy_valid_for(Role::Evader, evader_policy))
    throw ConfigError("montecarlo.evader_policy is not an evader policy");
}

std::vector<Agent> sample_initial(const McConfig& cfg, int run_index) {
  Rng rng(derive_seed(cfg.base_seed, static_cast<std::uint64_t>(run_index)));
  std::vector<Agent> agents;
  auto place = [&](const Box2& box) {
    for (;;) {
      Point2 p{rng.uniform(box.x_lo, box.x_hi), rng.uniform(box.y_lo, box.y_hi)};
      bool clash = false;
      for (const Agent& a : agents)
        if ((a.position - p).norm() < 1e-6) clash = true;
      if (!clash) return p;
    }
  };
  int id = 0;
  for (int i = 0; i < cfg.n_pursuers; ++i) {
    Agent a;
    a.id = id++;
    a.role = Role::Pursuer;
    a.policy = cfg.pursuer_policy;
    a.position = place(cfg.pursuer_box);
    agents.push_back(a);
  }
  for (int i = 0; i < cfg.n_evaders; ++i) {
    Agent a;
    a.id = id++;
    a.role = Role::Evader;
    a.policy = cfg.evader_policy;
    a.position = place(cfg.evader_box);
    if (cfg.evader_policy == PolicyKind::MoveToTarget)
      a.target = cfg.evader_target;
    agents.push_back(a);
  }
  return agents;
}

CaptureStats compute_stats(const std::vector<double>& times, int timeouts) {
  CaptureStats s;
  s.captured = static_cast<int>(times.size());
  s.timeout_count = timeouts;
  s.n_runs = s.captured + timeouts;
  if (times.empty()) return s;

  // sorted accumulation keeps the aggregate independent of arrival order
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double t : sorted) sum += t;
  s.mean = sum / sorted.size();
  s.min_time = sorted.front();
  s.max_time = sorted.back();
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double t : sorted) ss += (t - s.mean) * (t - s.mean);
    s.stddev = std::sqrt(ss / (sorted.size() - 1));
  }
  return s;
}

std::vector<std::optional<double>> mc_capture_times(const McConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<double>> times(cfg.n_runs);
  parallel_for(cfg.n_runs, [&](int run) {
    GameConfig game = cfg.game;
    game.agents = sample_initial(cfg, run);
    EpisodeResult r =
        run_episode(game, derive_seed(cfg.base_seed, static_cast<std::uint64_t>(run)));
    if (r.terminated_by == EpisodeResult::Termination::Capture) {
      double last = 0.0;
      for (const auto& [id, t] : r.capture_times) last = std::max(last, *t);
      times[run] = last;
    }
  });
  return times;
}

CaptureStats run_mc(const McConfig& cfg) {
  std::vector<double> captured;
  int timeouts = 0;
  for (const auto& t : mc_capture_times(cfg)) {
    if (t)
      captured.push_back(*t);
    else
      ++timeouts;
  }
  return compute_stats(captured, timeouts);
}

McConfig table_cell_config(const McConfig& base, PolicyKind policy, int ratio,
                           std::uint64_t cell_index) {
  McConfig cell = base;
  cell.n_pursuers = ratio;
  cell.n_evaders = 1;
  cell.pursuer_policy = policy;
  cell.evader_policy = policy == PolicyKind::PureDistance
                           ? PolicyKind::MoveToTarget
                           : PolicyKind::ConstantArea;
  cell.base_seed = derive_seed(base.base_seed, cell_index);
  return cell;
}

CaptureTimeTable build_capture_table(const std::vector<PolicyKind>& policies,
                                     const std::vector<int>& ratios,
                                     const McConfig& base) {
  if (policies.empty() || ratios.empty())
    throw ConfigError("capture table needs at least one policy and ratio");
  CaptureTimeTable table;
  std::uint64_t cell_index = 0;
  for (PolicyKind policy : policies) {
    for (int ratio : ratios) {
      if (ratio < 1) throw ConfigError("capture table ratio must be >= 1");
      McConfig cell = table_cell_config(base, policy, ratio, cell_index++);
      CaptureStats stats = run_mc(cell);
      if (stats.empty())
        throw Error("capture table cell " + to_string(policy) + "/" +
                    std::to_string(ratio) + " produced no captures");
      table.entries.push_back({policy, ratio, stats});
    }
  }
  table.t_norm = 0.0;
  table.min_mean = std::numeric_limits<double>::max();
  for (const auto& e : table.entries) {
    table.t_norm = std::max(table.t_norm, e.stats.mean);
    table.min_mean = std::min(table.min_mean, e.stats.mean);
  }
  return table;
}

double CaptureTimeTable::interpolate_mean(PolicyKind policy,
                                          double ratio) const {
  std::vector<const CaptureTableEntry*> knots;
  for (const auto& e : entries)
    if (e.policy == policy) knots.push_back(&e);
  if (knots.empty())
    throw DomainError("capture table has no entries for policy " +
                      to_string(policy));
  std::sort(knots.begin(), knots.end(),
            [](auto* a, auto* b) { return a->ratio < b->ratio; });
  if (ratio <= knots.front()->ratio) return knots.front()->stats.mean;
  if (ratio >= knots.back()->ratio) return knots.back()->stats.mean;
  for (size_t i = 1; i < knots.size(); ++i) {
    if (ratio <= knots[i]->ratio) {
      double r0 = knots[i - 1]->ratio, r1 = knots[i]->ratio;
      double m0 = knots[i - 1]->stats.mean, m1 = knots[i]->stats.mean;
      double w = (ratio - r0) / (r1 - r0);
      return m0 + w * (m1 - m0);
    }
  }
  return knots.back()->stats.mean;
}

double CaptureTimeTable::normalized_score(PolicyKind policy,
                                          double ratio) const {
  if (!(t_norm > 0.0)) throw DomainError("capture table is not normalized");
  return interpolate_mean(policy, ratio) / t_norm;
}

std::string CaptureTimeTable::to_json() const {
  nlohmann::ordered_json j;
  j["t_norm"] = round_g9(t_norm);
  j["min_mean"] = round_g9(min_mean);
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json cell;
    cell["policy"] = to_string(e.policy);
    cell["ratio"] = e.ratio;
    cell["mean"] = round_g9(e.stats.mean);
    cell["std"] = round_g9(e.stats.stddev);
    cell["min"] = round_g9(e.stats.min_time);
    cell["max"] = round_g9(e.stats.max_time);
    cell["n"] = e.stats.captured;
    j["cells"].push_back(cell);
  }
  return j.dump(2);
}

CaptureTimeTable CaptureTimeTable::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("capture table parse failure: ") + e.what());
  }
  CaptureTimeTable table;
  try {
    table.t_norm = j.at("t_norm").get<double>();
    table.min_mean = j.at("min_mean").get<double>();
    for (const auto& cell : j.at("cells")) {
      CaptureTableEntry e;
      e.policy = parse_policy(cell.at("policy").get<std::string>());
      e.ratio = cell.at("ratio").get<int>();
      e.stats.mean = cell.at("mean").get<double>();
      e.stats.stddev = cell.at("std").get<double>();
      e.stats.min_time = cell.at("min").get<double>();
      e.stats.max_time = cell.at("max").get<double>();
      e.stats.captured = cell.at("n").get<int>();
      e.stats.n_runs = e.stats.captured;
      table.entries.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("capture table schema mismatch: ") + e.what());
  }
  if (table.entries.empty()) throw IoError("capture table has no cells");
  return table;
}

}  // namespace swarm_pe
