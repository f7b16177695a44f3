#include "swarm_pe/pe_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarm_pe {

bool policy_valid_for(Role role, PolicyKind policy) {
  switch (policy) {
    case PolicyKind::AreaMin:
    case PolicyKind::PureDistance:
      return role == Role::Pursuer;
    case PolicyKind::ConstantArea:
    case PolicyKind::MoveToCentroid:
    case PolicyKind::MoveToTarget:
      return role == Role::Evader;
  }
  return false;
}

std::string to_string(Role role) {
  return role == Role::Pursuer ? "pursuer" : "evader";
}

std::string to_string(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::AreaMin: return "area_min";
    case PolicyKind::PureDistance: return "pure_distance";
    case PolicyKind::ConstantArea: return "constant_area";
    case PolicyKind::MoveToCentroid: return "move_to_centroid";
    case PolicyKind::MoveToTarget: return "move_to_target";
  }
  return "unknown";
}

Role parse_role(const std::string& s) {
  if (s == "pursuer") return Role::Pursuer;
  if (s == "evader") return Role::Evader;
  throw ConfigError("unknown role '" + s + "'");
}

PolicyKind parse_policy(const std::string& s) {
  if (s == "area_min") return PolicyKind::AreaMin;
  if (s == "pure_distance") return PolicyKind::PureDistance;
  if (s == "constant_area") return PolicyKind::ConstantArea;
  if (s == "move_to_centroid") return PolicyKind::MoveToCentroid;
  if (s == "move_to_target") return PolicyKind::MoveToTarget;
  throw ConfigError("unknown policy '" + s + "'");
}

void GameConfig::validate() const {
  if (!(r_c > 0.0)) throw ConfigError("game.r_c must be > 0");
  if (!(dt > 0.0)) throw ConfigError("game.dt must be > 0");
  if (!(v_max > 0.0)) throw ConfigError("game.v_max must be > 0");
  if (!(t_max > 0.0)) throw ConfigError("game.t_max must be > 0");
  int pursuers = 0, evaders = 0;
  for (const Agent& a : agents) {
    if (!a.position.allFinite())
      throw ConfigError("game.agents: non-finite position");
    if (!domain.contains(a.position))
      throw ConfigError("game.agents: position outside domain");
    if (!policy_valid_for(a.role, a.policy))
      throw ConfigError("game.agents: policy " + to_string(a.policy) +
                        " not valid for role " + to_string(a.role));
    if (a.policy == PolicyKind::MoveToTarget && !a.target)
      throw ConfigError("game.agents: move_to_target needs a target");
    (a.role == Role::Pursuer ? pursuers : evaders) += 1;
  }
  for (size_t i = 0; i < agents.size(); ++i)
    for (size_t j = i + 1; j < agents.size(); ++j)
      if (agents[i].id == agents[j].id)
        throw ConfigError("game.agents: duplicate agent id");
  if (pursuers < 1) throw ConfigError("game.agents: need at least 1 pursuer");
  if (evaders < 1) throw ConfigError("game.agents: need at least 1 evader");
}

namespace {

Point2 unit_toward(const Point2& from, const Point2& to) {
  Point2 d = to - from;
  double len = d.norm();
  if (len <= kGeomTol)
    throw ZeroDirectionError("direction length below tolerance");
  return d / len;
}

// Rebuilds the tessellation over alive agents. Agents within kGeomTol of
// each other are mapped to one shared site.
void rebuild_diagram(GameState& state, const GameConfig& config) {
  std::vector<Point2> sites;
  state.site_of.assign(state.agents.size(), -1);
  for (size_t i = 0; i < state.agents.size(); ++i) {
    if (!state.agents[i].alive) continue;
    const Point2& p = state.agents[i].position;
    int found = -1;
    for (size_t s = 0; s < sites.size(); ++s) {
      if ((sites[s] - p).norm() < kGeomTol) {
        found = static_cast<int>(s);
        break;
      }
    }
    if (found < 0) {
      sites.push_back(p);
      found = static_cast<int>(sites.size()) - 1;
    }
    state.site_of[i] = found;
  }
  state.diagram = clipped_voronoi(sites, config.domain);
}

// Index (into state.agents) of the nearest alive agent of `role` as seen
// from `from`; lowest id wins ties. -1 when none alive.
int nearest_alive(const GameState& state, const Point2& from, Role role) {
  int best = -1;
  double best_d = std::numeric_limits<double>::max();
  for (size_t i = 0; i < state.agents.size(); ++i) {
    const Agent& a = state.agents[i];
    if (!a.alive || a.role != role) continue;
    double d = (a.position - from).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Point2 control_for(const GameState& state, size_t idx) {
  const Agent& agent = state.agents[idx];
  int my_site = state.site_of[idx];
  switch (agent.policy) {
    case PolicyKind::PureDistance: {
      std::vector<Point2> evaders;
      for (const Agent& a : state.agents)
        if (a.alive && a.role == Role::Evader) evaders.push_back(a.position);
      return pure_distance_control(agent.position, evaders);
    }
    case PolicyKind::AreaMin: {
      int engaged = nearest_alive(state, agent.position, Role::Evader);
      int evader_site = state.site_of[engaged];
      if (my_site != evader_site &&
          shared_edge(state.diagram, my_site, evader_site))
        return area_min_control(my_site, state.diagram, evader_site);
      // not a Voronoi neighbor of the engaged evader: fall back to pursuit
      std::vector<Point2> evaders;
      for (const Agent& a : state.agents)
        if (a.alive && a.role == Role::Evader) evaders.push_back(a.position);
      return pure_distance_control(agent.position, evaders);
    }
    case PolicyKind::ConstantArea: {
      // nearest pursuer among the evader's Voronoi neighbors
      int best = -1;
      double best_d = std::numeric_limits<double>::max();
      for (size_t i = 0; i < state.agents.size(); ++i) {
        const Agent& a = state.agents[i];
        if (!a.alive || a.role != Role::Pursuer) continue;
        if (state.site_of[i] == my_site) continue;
        if (!shared_edge(state.diagram, my_site, state.site_of[i])) continue;
        double d = (a.position - agent.position).norm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(i);
        }
      }
      if (best < 0) return Point2::Zero();  // no pursuer neighbors: hold
      return constant_area_control(my_site, state.diagram,
                                   state.site_of[best]);
    }
    case PolicyKind::MoveToCentroid:
      return move_to_centroid_control(my_site, state.diagram);
    case PolicyKind::MoveToTarget:
      return unit_toward(agent.position, *agent.target);
  }
  return Point2::Zero();
}

}  // namespace

Point2 pure_distance_control(const Point2& pursuer,
                             const std::vector<Point2>& evaders) {
  if (evaders.empty())
    throw EpisodeOverError("pure_distance_control: no evaders");
  int best = 0;
  double best_d = (evaders[0] - pursuer).norm();
  for (size_t i = 1; i < evaders.size(); ++i) {
    double d = (evaders[i] - pursuer).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return unit_toward(pursuer, evaders[best]);
}

Point2 area_gradient(int pursuer_site, const VoronoiDiagram& d,
                     int evader_site) {
  auto edge = shared_edge(d, pursuer_site, evader_site);
  if (!edge)
    throw NonNeighborError("area_gradient: cells share no edge");
  const Point2& xp = d.sites[pursuer_site];
  const Point2& xe = d.sites[evader_site];
  double dist = (xp - xe).norm();
  if (dist <= kGeomTol)
    throw SingularityError("area_gradient: coincident pursuer and evader");
  return edge->length() / dist * (xp - edge->centroid());
}

Point2 area_min_control(int pursuer_site, const VoronoiDiagram& d,
                        int evader_site) {
  auto edge = shared_edge(d, pursuer_site, evader_site);
  if (!edge)
    throw NonNeighborError("area_min_control: cells share no edge");
  return unit_toward(d.sites[pursuer_site], edge->centroid());
}

Point2 constant_area_control(int evader_site, const VoronoiDiagram& d,
                             int pursuer_site) {
  auto edge = shared_edge(d, evader_site, pursuer_site);
  if (!edge)
    throw NonNeighborError("constant_area_control: cells share no edge");
  return unit_toward(d.sites[evader_site], edge->centroid());
}

Point2 move_to_centroid_control(int evader_site, const VoronoiDiagram& d) {
  Point2 delta =
      polygon_centroid(d.cells[evader_site]) - d.sites[evader_site];
  double len = delta.norm();
  if (len <= kGeomTol) return Point2::Zero();
  return delta / len;
}

std::vector<int> capture_check(const GameState& state, double r_c) {
  std::vector<int> captured;
  for (const Agent& e : state.agents) {
    if (!e.alive || e.role != Role::Evader) continue;
    for (const Agent& p : state.agents) {
      if (!p.alive || p.role != Role::Pursuer) continue;
      if ((e.position - p.position).norm() < r_c) {  // strict
        captured.push_back(e.id);
        break;
      }
    }
  }
  return captured;
}

GameState initial_state(const GameConfig& config) {
  GameState state;
  state.agents = config.agents;
  state.step_count = 0;
  state.t = 0.0;
  rebuild_diagram(state, config);
  return state;
}

GameState step(const GameState& state, const GameConfig& config) {
  bool any_evader = false, any_pursuer = false;
  for (const Agent& a : state.agents) {
    if (!a.alive) continue;
    (a.role == Role::Evader ? any_evader : any_pursuer) = true;
  }
  if (!any_evader || !any_pursuer)
    throw EpisodeOverError("step: a side has no alive agents");

  // controls from the pre-step diagram, applied synchronously
  std::vector<Point2> controls(state.agents.size(), Point2::Zero());
  for (size_t i = 0; i < state.agents.size(); ++i) {
    if (!state.agents[i].alive) continue;
    try {
      controls[i] = control_for(state, i);
    } catch (const ZeroDirectionError&) {
      controls[i] = Point2::Zero();  // hold for this step
    }
  }

  GameState next = state;
  for (size_t i = 0; i < next.agents.size(); ++i) {
    if (!next.agents[i].alive) continue;
    Point2 moved =
        next.agents[i].position + controls[i] * config.v_max * config.dt;
    next.agents[i].position = config.domain.project(moved);
  }
  next.step_count = state.step_count + 1;
  next.t = static_cast<double>(next.step_count) * config.dt;

  for (int id : capture_check(next, config.r_c)) {
    for (Agent& a : next.agents)
      if (a.id == id) a.alive = false;
  }

  rebuild_diagram(next, config);
  return next;
}

namespace {

void log_rows(const GameState& state, EpisodeResult& result) {
  for (const Agent& a : state.agents) {
    result.trajectory.push_back({state.t, a.id, a.role, a.position.x(),
                                 a.position.y(), a.alive});
  }
}

}  // namespace

EpisodeResult run_episode(const GameConfig& config, std::uint64_t seed) {
  config.validate();
  EpisodeResult result;
  result.seed = seed;

  GameState state = initial_state(config);
  for (const Agent& a : state.agents)
    if (a.role == Role::Evader)
      result.capture_times[a.id] = std::nullopt;

  // an episode can be over before it starts
  for (int id : capture_check(state, config.r_c)) {
    for (Agent& a : state.agents)
      if (a.id == id) a.alive = false;
    result.capture_times[id] = 0.0;
  }
  log_rows(state, result);

  long max_steps = static_cast<long>(std::floor(config.t_max / config.dt + 1e-9));
  auto evaders_alive = [&] {
    for (const Agent& a : state.agents)
      if (a.alive && a.role == Role::Evader) return true;
    return false;
  };

  while (evaders_alive() && state.step_count < max_steps) {
    GameState next = step(state, config);
    for (const Agent& a : next.agents) {
      if (a.role == Role::Evader && !a.alive &&
          !result.capture_times[a.id].has_value())
        result.capture_times[a.id] = next.t;
    }
    state = std::move(next);
    log_rows(state, result);
  }

  bool all_captured = true;
  for (const auto& [id, t] : result.capture_times)
    if (!t.has_value()) all_captured = false;
  result.terminated_by = all_captured ? EpisodeResult::Termination::Capture
                                      : EpisodeResult::Termination::Timeout;
  return result;
}

}  // namespace swarm_pe
