#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarm_pe/geometry.hpp"

namespace swarm_pe {

enum class Role { Pursuer, Evader };

enum class PolicyKind {
  AreaMin,         // pursuer: steer toward the shared-boundary centroid
  PureDistance,    // pursuer: steer straight at the nearest evader
  ConstantArea,    // evader: steer toward the shared-boundary midpoint
  MoveToCentroid,  // evader: steer toward the centroid of its own cell
  MoveToTarget,    // evader: steer toward a fixed target point
};

bool policy_valid_for(Role role, PolicyKind policy);
std::string to_string(Role role);
std::string to_string(PolicyKind policy);
Role parse_role(const std::string& s);
PolicyKind parse_policy(const std::string& s);

struct Agent {
  int id = 0;
  Role role = Role::Pursuer;
  PolicyKind policy = PolicyKind::PureDistance;
  Point2 position = Point2::Zero();
  bool alive = true;
  std::optional<Point2> target;  // MoveToTarget only
};

struct GameConfig {
  ConvexPolygon domain = ConvexPolygon::box({0.0, 0.0}, {10.0, 10.0});
  double v_max = 1.0;
  double r_c = 0.25;
  double dt = 0.01;
  double t_max = 200.0;
  std::vector<Agent> agents;  // initial roster

  void validate() const;  // throws ConfigError naming the offending field
};

// Snapshot of the game between steps. The diagram covers alive agents only;
// agents closer than kGeomTol share one site so the tessellation stays valid
// even if pursuers merge.
struct GameState {
  std::vector<Agent> agents;
  long step_count = 0;
  double t = 0.0;  // always step_count * dt
  VoronoiDiagram diagram;
  std::vector<int> site_of;  // agent index -> site index, -1 when dead
};

// ---- Control laws ----------------------------------------------------------

// Unit vector from the pursuer toward its nearest evader (lowest index wins
// ties). Throws ZeroDirectionError when coincident with the nearest evader.
Point2 pure_distance_control(const Point2& pursuer,
                             const std::vector<Point2>& evaders);

// d(evader cell area)/d(pursuer position): edge_length / dist * (p - C_b),
// where C_b is the centroid of the shared Voronoi edge. Throws
// NonNeighborError without a shared edge, SingularityError when coincident.
Point2 area_gradient(int pursuer_site, const VoronoiDiagram& d,
                     int evader_site);

// Unit vector from the pursuer toward the shared-edge centroid; equals the
// normalized negative of area_gradient. Throws ZeroDirectionError when the
// pursuer sits on the centroid.
Point2 area_min_control(int pursuer_site, const VoronoiDiagram& d,
                        int evader_site);

// Unit vector from the evader toward the midpoint of the boundary shared
// with the given pursuer.
Point2 constant_area_control(int evader_site, const VoronoiDiagram& d,
                             int pursuer_site);

// Unit vector toward the evader's own cell centroid; returns the zero vector
// when already there (a legitimate fixed point, not an error).
Point2 move_to_centroid_control(int evader_site, const VoronoiDiagram& d);

// ---- Simulation -------------------------------------------------------------

// Ids of alive evaders strictly within r_c of an alive pursuer.
std::vector<int> capture_check(const GameState& state, double r_c);

GameState initial_state(const GameConfig& config);

// One forward-Euler step: controls from the current diagram, synchronous
// position update, projection onto the domain, capture marking, and a fresh
// diagram for the resulting state.
GameState step(const GameState& state, const GameConfig& config);

struct TrajectoryRow {
  double t;
  int agent_id;
  Role role;
  double x;
  double y;
  bool alive;
};

struct EpisodeResult {
  enum class Termination { Capture, Timeout };

  std::map<int, std::optional<double>> capture_times;  // evader id -> time
  Termination terminated_by = Termination::Timeout;
  std::vector<TrajectoryRow> trajectory;  // one row per agent per step
  std::uint64_t seed = 0;
};

// Runs until every evader is captured or t reaches t_max. All control laws
// are deterministic; the seed is echoed into the result for log provenance.
EpisodeResult run_episode(const GameConfig& config, std::uint64_t seed);

}  // namespace swarm_pe
