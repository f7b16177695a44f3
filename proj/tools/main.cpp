// swarm_pe: pursuit-evasion games, capture-time statistics, grid-engagement
// MDP rollouts and TD3 training, driven by a single JSON config.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>

#include "swarm_pe/grid_env.hpp"
#include "swarm_pe/io.hpp"
#include "swarm_pe/monte_carlo.hpp"
#include "swarm_pe/pe_game.hpp"
#include "swarm_pe/td3.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace swarm_pe;

namespace {

// ---- config ----------------------------------------------------------------

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  GameConfig game;
  McConfig mc;
  std::vector<int> table_ratios = {1, 3, 5};
  std::vector<PolicyKind> table_policies = {PolicyKind::PureDistance,
                                            PolicyKind::AreaMin};

  GridEnvConfig grid;
  std::string rollout_policy = "random";  // or "constant"
  Eigen::VectorXd rollout_action;
  int rollout_episodes = 1;

  Td3Config td3;
  int train_episodes = 500;
};

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in section '" +
                        section + "'");
}

Point2 parse_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(what + " must be a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Eigen::VectorXd parse_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

GameConfig parse_game(const json& j) {
  check_keys(j, {"box", "domain_vertices", "v_max", "r_c", "dt", "t_max",
                 "agents"},
             "game");
  GameConfig cfg;
  if (j.contains("box")) {
    auto b = j["box"];
    if (!b.is_array() || b.size() != 2)
      throw ConfigError("game.box must be [lo, hi]");
    double lo = b[0].get<double>(), hi = b[1].get<double>();
    cfg.domain = ConvexPolygon::box({lo, lo}, {hi, hi});
  } else if (j.contains("domain_vertices")) {
    std::vector<Point2> verts;
    for (const auto& v : j["domain_vertices"])
      verts.push_back(parse_point(v, "game.domain_vertices entry"));
    cfg.domain = ConvexPolygon(verts);
  }
  if (j.contains("v_max")) cfg.v_max = j["v_max"].get<double>();
  if (j.contains("r_c")) cfg.r_c = j["r_c"].get<double>();
  if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
  if (j.contains("t_max")) cfg.t_max = j["t_max"].get<double>();
  if (j.contains("agents")) {
    int next_id = 0;
    for (const auto& a : j["agents"]) {
      check_keys(a, {"id", "role", "policy", "position", "target"},
                 "game.agents[]");
      Agent agent;
      agent.id = a.contains("id") ? a["id"].get<int>() : next_id;
      next_id = agent.id + 1;
      agent.role = parse_role(a.at("role").get<std::string>());
      agent.policy = parse_policy(a.at("policy").get<std::string>());
      agent.position = parse_point(a.at("position"), "agent position");
      if (a.contains("target"))
        agent.target = parse_point(a["target"], "agent target");
      cfg.agents.push_back(agent);
    }
  }
  return cfg;
}

Box2 parse_box4(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4)
    throw ConfigError(what + " must be [x_lo, x_hi, y_lo, y_hi]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

void parse_montecarlo(const json& j, RunConfig& run) {
  check_keys(j,
             {"n_runs", "n_pursuers", "n_evaders", "pursuer_policy",
              "evader_policy", "evader_target", "pursuer_box", "evader_box",
              "ratios", "table_policies"},
             "montecarlo");
  McConfig& cfg = run.mc;
  if (j.contains("n_runs")) cfg.n_runs = j["n_runs"].get<int>();
  if (j.contains("n_pursuers")) cfg.n_pursuers = j["n_pursuers"].get<int>();
  if (j.contains("n_evaders")) cfg.n_evaders = j["n_evaders"].get<int>();
  if (j.contains("pursuer_policy"))
    cfg.pursuer_policy = parse_policy(j["pursuer_policy"].get<std::string>());
  if (j.contains("evader_policy"))
    cfg.evader_policy = parse_policy(j["evader_policy"].get<std::string>());
  if (j.contains("evader_target"))
    cfg.evader_target =
        parse_point(j["evader_target"], "montecarlo.evader_target");
  if (j.contains("pursuer_box"))
    cfg.pursuer_box = parse_box4(j["pursuer_box"], "montecarlo.pursuer_box");
  if (j.contains("evader_box"))
    cfg.evader_box = parse_box4(j["evader_box"], "montecarlo.evader_box");
  if (j.contains("ratios")) {
    run.table_ratios.clear();
    for (const auto& r : j["ratios"]) run.table_ratios.push_back(r.get<int>());
  }
  if (j.contains("table_policies")) {
    run.table_policies.clear();
    for (const auto& p : j["table_policies"])
      run.table_policies.push_back(parse_policy(p.get<std::string>()));
  }
}

void parse_grid(const json& j, RunConfig& run) {
  check_keys(j,
             {"n", "k_max", "c_distribution", "c_capture", "unit_scale",
              "table_policy", "score_orientation", "fail_on_leak",
              "intruder_total", "defender_init", "intruder_init",
              "rollout_policy", "rollout_action", "rollout_episodes"},
             "grid");
  GridEnvConfig& cfg = run.grid;
  if (j.contains("n")) cfg.n = j["n"].get<int>();
  if (j.contains("k_max")) cfg.k_max = j["k_max"].get<int>();
  if (j.contains("c_distribution"))
    cfg.c_distribution = j["c_distribution"].get<double>();
  if (j.contains("c_capture")) cfg.c_capture = j["c_capture"].get<double>();
  if (j.contains("unit_scale")) cfg.unit_scale = j["unit_scale"].get<double>();
  if (j.contains("table_policy"))
    cfg.table_policy = parse_policy(j["table_policy"].get<std::string>());
  if (j.contains("score_orientation")) {
    // one orientation is implemented: faster capture earns more reward
    std::string o = j["score_orientation"].get<std::string>();
    if (o != "fast_capture_high")
      throw ConfigError("grid.score_orientation must be 'fast_capture_high'");
  }
  if (j.contains("fail_on_leak"))
    cfg.fail_on_leak = j["fail_on_leak"].get<bool>();
  if (j.contains("intruder_total"))
    cfg.intruder_total = j["intruder_total"].get<double>();
  if (j.contains("defender_init"))
    cfg.defender_init = parse_vector(j["defender_init"], "grid.defender_init");
  if (j.contains("intruder_init"))
    cfg.intruder_init = parse_vector(j["intruder_init"], "grid.intruder_init");
  if (j.contains("rollout_policy")) {
    run.rollout_policy = j["rollout_policy"].get<std::string>();
    if (run.rollout_policy != "random" && run.rollout_policy != "constant")
      throw ConfigError("grid.rollout_policy must be 'random' or 'constant'");
  }
  if (j.contains("rollout_action"))
    run.rollout_action =
        parse_vector(j["rollout_action"], "grid.rollout_action");
  if (j.contains("rollout_episodes"))
    run.rollout_episodes = j["rollout_episodes"].get<int>();
}

void parse_td3(const json& j, RunConfig& run) {
  check_keys(j,
             {"hidden", "gamma", "rho", "a_low", "a_high", "sigma_expl",
              "sigma_smooth", "noise_clip", "policy_delay", "batch_size",
              "buffer_capacity", "actor_lr", "critic_lr", "warmup_steps",
              "episodes"},
             "td3");
  Td3Config& cfg = run.td3;
  if (j.contains("hidden")) {
    cfg.hidden.clear();
    for (const auto& h : j["hidden"]) cfg.hidden.push_back(h.get<int>());
  }
  if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
  if (j.contains("rho")) cfg.rho = j["rho"].get<double>();
  if (j.contains("a_low")) cfg.a_low = j["a_low"].get<double>();
  if (j.contains("a_high")) cfg.a_high = j["a_high"].get<double>();
  if (j.contains("sigma_expl")) cfg.sigma_expl = j["sigma_expl"].get<double>();
  if (j.contains("sigma_smooth"))
    cfg.sigma_smooth = j["sigma_smooth"].get<double>();
  if (j.contains("noise_clip")) cfg.noise_clip = j["noise_clip"].get<double>();
  if (j.contains("policy_delay"))
    cfg.policy_delay = j["policy_delay"].get<int>();
  if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
  if (j.contains("buffer_capacity"))
    cfg.buffer_capacity = j["buffer_capacity"].get<std::size_t>();
  if (j.contains("actor_lr")) cfg.actor_lr = j["actor_lr"].get<double>();
  if (j.contains("critic_lr")) cfg.critic_lr = j["critic_lr"].get<double>();
  if (j.contains("warmup_steps"))
    cfg.warmup_steps = j["warmup_steps"].get<int>();
  if (j.contains("episodes")) run.train_episodes = j["episodes"].get<int>();
}

RunConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  check_keys(j, {"seed", "out_dir", "game", "montecarlo", "grid", "td3"},
             "(top level)");
  RunConfig run;
  if (j.contains("seed")) run.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out_dir")) run.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("game")) run.game = parse_game(j["game"]);
  if (j.contains("montecarlo")) parse_montecarlo(j["montecarlo"], run);
  if (j.contains("grid")) parse_grid(j["grid"], run);
  if (j.contains("td3")) parse_td3(j["td3"], run);

  // the montecarlo harness inherits the arena physics
  run.mc.game = run.game;
  run.mc.game.agents.clear();
  run.mc.base_seed = run.seed;
  return run;
}

// ---- common CLI plumbing ----------------------------------------------------

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string table;
  std::optional<int> runs;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, CliArgs& args, bool with_table = true) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")
      ->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out, "override the output directory");
  if (with_table)
    cmd->add_option("--table", args.table, "capture-time table path");
}

RunConfig make_run(const CliArgs& args) {
  RunConfig run = load_config(args.config_path);
  if (args.seed) {
    run.seed = *args.seed;
    run.mc.base_seed = *args.seed;
  }
  if (args.out) run.out_dir = *args.out;
  if (args.runs) run.mc.n_runs = *args.runs;
  return run;
}

fs::path ensure_out_dir(const RunConfig& run) {
  fs::path dir(run.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + run.out_dir);
  return dir;
}

CaptureTimeTable load_table_file(const std::string& path) {
  if (path.empty())
    throw ConfigError(
        "this command needs --table pointing at a capture-time table "
        "(build one with: montecarlo --table PATH)");
  if (!fs::exists(path))
    throw IoError("capture-time table not found: " + path);
  return CaptureTimeTable::from_json(read_text_file(path));
}

// ---- artifact writers --------------------------------------------------------

void write_trajectory_csv(const EpisodeResult& result, const fs::path& path) {
  CsvWriter csv({"t", "agent_id", "role", "x", "y", "alive"});
  for (const TrajectoryRow& row : result.trajectory) {
    csv.row({fmt_g9(row.t), std::to_string(row.agent_id), to_string(row.role),
             fmt_g9(row.x), fmt_g9(row.y), row.alive ? "1" : "0"});
  }
  csv.save(path.string());
}

// Positions and alive flags of every agent at one trajectory step.
struct Snapshot {
  double t = 0.0;
  std::vector<TrajectoryRow> rows;
};

Snapshot snapshot_at(const EpisodeResult& result, std::size_t n_agents,
                     std::size_t step) {
  Snapshot snap;
  snap.rows.assign(result.trajectory.begin() + step * n_agents,
                   result.trajectory.begin() + (step + 1) * n_agents);
  snap.t = snap.rows.front().t;
  return snap;
}

void write_snapshot_svg(const EpisodeResult& result, const GameConfig& game,
                        std::size_t n_agents, std::size_t step,
                        const fs::path& path) {
  Snapshot snap = snapshot_at(result, n_agents, step);

  SvgWriter svg(440, 440, -0.5, -0.5, 10.5, 10.5);
  auto poly_points = [](const ConvexPolygon& p) {
    std::vector<std::pair<double, double>> pts;
    for (const Point2& v : p.vertices()) pts.emplace_back(v.x(), v.y());
    return pts;
  };
  svg.polygon(poly_points(game.domain),
              "fill:#ffffff;stroke:#000000;stroke-width:2");

  // tessellation over the agents alive at this instant
  std::vector<Point2> sites;
  for (const TrajectoryRow& r : snap.rows) {
    if (!r.alive) continue;
    Point2 p{r.x, r.y};
    bool dup = false;
    for (const Point2& s : sites)
      if ((s - p).norm() < kGeomTol) dup = true;
    if (!dup) sites.push_back(p);
  }
  if (!sites.empty()) {
    VoronoiDiagram d = clipped_voronoi(sites, game.domain);
    for (const ConvexPolygon& cell : d.cells)
      svg.polygon(poly_points(cell), "fill:none;stroke:#888888;stroke-width:1");
  }

  // trajectories up to the snapshot time
  for (std::size_t i = 0; i < n_agents; ++i) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k <= step; ++k) {
      const TrajectoryRow& r = result.trajectory[k * n_agents + i];
      pts.emplace_back(r.x, r.y);
    }
    bool pursuer = snap.rows[i].role == Role::Pursuer;
    svg.polyline(pts, pursuer ? "fill:none;stroke:#1f77b4;stroke-width:1.5"
                              : "fill:none;stroke:#d62728;stroke-width:1.5");
  }
  for (const TrajectoryRow& r : snap.rows) {
    bool pursuer = r.role == Role::Pursuer;
    std::string fill = pursuer ? "#1f77b4" : "#d62728";
    if (!r.alive) fill = "#bbbbbb";
    svg.circle(r.x, r.y, 0.12,
               "fill:" + fill + ";stroke:#000000;stroke-width:0.5");
  }
  svg.text(-0.3, 10.2, "t=" + fmt_g9(snap.t), "font-size:16px;fill:#000000");
  svg.save(path.string());
}

ordered_json state_line(int k, const GridState& s, double reward, bool done) {
  ordered_json line;
  line["k"] = k;
  line["defender"] = ordered_json::array();
  for (int i = 0; i < s.defender.size(); ++i)
    line["defender"].push_back(round_g9(s.defender[i]));
  line["intruder"] = ordered_json::array();
  for (int i = 0; i < s.intruder.size(); ++i)
    line["intruder"].push_back(round_g9(s.intruder[i]));
  line["reward"] = round_g9(reward);
  line["done"] = done;
  return line;
}

void write_density_strip_svg(const std::vector<GridState>& states, int n,
                             const fs::path& path) {
  double cell = 36.0, pad = 10.0, label = 18.0;
  double panel = n * cell;
  double width = states.size() * (panel + pad) + pad;
  double height = panel + 2 * pad + label;
  SvgWriter svg(width, height, 0, 0, width, height);
  for (std::size_t s = 0; s < states.size(); ++s) {
    double ox = pad + s * (panel + pad);
    double oy = pad + label;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        double x = ox + c * cell;
        // row 0 renders on top
        double y = height - oy - (r + 1) * cell;
        svg.rect(x, y, cell, cell, "fill:#ffffff;stroke:#444444;stroke-width:1");
        double def = states[s].defender[r * n + c];
        double intr = states[s].intruder[r * n + c];
        if (def > 1e-9)
          svg.rect(x, y, cell, cell,
                   "fill:#1f77b4;fill-opacity:" + fmt_g9(std::min(1.0, def)) +
                       ";stroke:none");
        if (intr > 1e-9)
          svg.rect(x, y, cell, cell,
                   "fill:#d62728;fill-opacity:" +
                       fmt_g9(std::min(1.0, intr) * 0.85) + ";stroke:none");
      }
    }
    svg.text(ox, height - pad - 2, "k=" + std::to_string(states[s].k),
             "font-size:12px;fill:#000000");
  }
  svg.save(path.string());
}

// ---- subcommands --------------------------------------------------------------

int cmd_simulate(const CliArgs& args) {
  RunConfig run = make_run(args);
  if (run.game.agents.empty())
    throw ConfigError("simulate needs game.agents in the config");
  fs::path out = ensure_out_dir(run);

  EpisodeResult result = run_episode(run.game, run.seed);
  std::size_t n_agents = run.game.agents.size();
  std::size_t steps = result.trajectory.size() / n_agents;

  write_trajectory_csv(result, out / "trajectory.csv");
  std::size_t last = steps - 1;
  std::size_t snaps[3] = {0, last / 2, last};
  for (int i = 0; i < 3; ++i)
    write_snapshot_svg(result, run.game, n_agents, snaps[i],
                       out / ("snapshot_" + std::to_string(i) + ".svg"));

  double last_capture = 0.0;
  bool all = result.terminated_by == EpisodeResult::Termination::Capture;
  for (const auto& [id, t] : result.capture_times)
    if (t) last_capture = std::max(last_capture, *t);
  std::printf("simulate: %s at t=%s (%zu steps); artifacts in %s\n",
              all ? "all evaders captured" : "timeout",
              fmt_g9(all ? last_capture : run.game.t_max).c_str(), steps - 1,
              out.string().c_str());
  return 0;
}

int cmd_montecarlo(const CliArgs& args) {
  RunConfig run = make_run(args);
  fs::path out = ensure_out_dir(run);

  auto times = mc_capture_times(run.mc);
  std::vector<double> captured;
  int timeouts = 0;
  CsvWriter csv({"run", "captured", "capture_time"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i]) {
      captured.push_back(*times[i]);
      csv.row({std::to_string(i), "1", fmt_g9(*times[i])});
    } else {
      ++timeouts;
      csv.row({std::to_string(i), "0", ""});
    }
  }
  csv.save((out / "capture_times.csv").string());

  CaptureStats stats = compute_stats(captured, timeouts);
  ordered_json report;
  report["pursuer_policy"] = to_string(run.mc.pursuer_policy);
  report["evader_policy"] = to_string(run.mc.evader_policy);
  report["n_pursuers"] = run.mc.n_pursuers;
  report["n_evaders"] = run.mc.n_evaders;
  report["n_runs"] = stats.n_runs;
  report["captured"] = stats.captured;
  report["timeouts"] = stats.timeout_count;
  report["mean"] = round_g9(stats.mean);
  report["std"] = round_g9(stats.stddev);
  report["min"] = round_g9(stats.min_time);
  report["max"] = round_g9(stats.max_time);
  write_text_file((out / "capture_stats.json").string(), report.dump(2) + "\n");

  std::printf("montecarlo: %d runs, mean=%s std=%s timeouts=%d\n",
              stats.n_runs, fmt_g9(stats.mean).c_str(),
              fmt_g9(stats.stddev).c_str(), stats.timeout_count);

  if (!args.table.empty()) {
    CaptureTimeTable table =
        build_capture_table(run.table_policies, run.table_ratios, run.mc);
    write_text_file(args.table, table.to_json() + "\n");
    std::printf("montecarlo: capture table written to %s\n",
                args.table.c_str());
  }
  return 0;
}

GridEnv make_grid_env(RunConfig& run, const CliArgs& args) {
  if (run.grid.c_capture > 0.0 || !args.table.empty())
    run.grid.table = load_table_file(args.table);
  return GridEnv(run.grid);
}

int cmd_mdp_rollout(const CliArgs& args) {
  RunConfig run = make_run(args);
  fs::path out = ensure_out_dir(run);
  GridEnv env = make_grid_env(run, args);

  Rng rng(derive_seed(run.seed, 0xf01));
  if (run.rollout_policy == "constant" &&
      run.rollout_action.size() != env.action_dim())
    throw ConfigError("grid.rollout_action must have " +
                      std::to_string(env.action_dim()) + " entries");

  std::string lines;
  for (int ep = 0; ep < run.rollout_episodes; ++ep) {
    env.reset(derive_seed(run.seed, ep));
    lines += state_line(0, env.state(), 0.0, false).dump() + "\n";
    bool done = false;
    while (!done) {
      Eigen::VectorXd a;
      if (run.rollout_policy == "constant") {
        a = run.rollout_action;
      } else {
        a.resize(env.action_dim());
        for (int i = 0; i < a.size(); ++i) a[i] = rng.uniform01();
      }
      GridStepResult r = env.step_detailed(a);
      lines += state_line(r.state.k, r.state, r.reward, r.done).dump() + "\n";
      done = r.done;
    }
  }
  write_text_file((out / "rollout.jsonl").string(), lines);
  std::printf("mdp-rollout: %d episode(s) written to %s\n",
              run.rollout_episodes, (out / "rollout.jsonl").string().c_str());
  return 0;
}

int cmd_train(const CliArgs& args) {
  RunConfig run = make_run(args);
  fs::path out = ensure_out_dir(run);
  GridEnv env = make_grid_env(run, args);

  Rng init_rng(derive_seed(run.seed, 0x7d3));
  Td3Params params =
      Td3Params::make(env.obs_dim(), env.action_dim(), run.td3, init_rng);
  TrainResult result =
      train(env, params, run.td3, run.seed, run.train_episodes);

  CsvWriter csv({"episode", "steps", "return", "critic_loss_mean"});
  for (const EpisodeLogRow& row : result.log)
    csv.row({std::to_string(row.episode), std::to_string(row.steps),
             fmt_g9(row.episode_return), fmt_g9(row.critic_loss_mean)});
  csv.save((out / "training_log.csv").string());
  save_checkpoint((out / "checkpoint.bin").string(), params, run.td3);

  double tail_mean = 0.0;
  int tail = static_cast<int>(std::min<std::size_t>(50, result.log.size()));
  for (int i = 0; i < tail; ++i)
    tail_mean += result.log[result.log.size() - 1 - i].episode_return;
  if (tail > 0) tail_mean /= tail;
  std::printf(
      "train: %d episodes (%ld steps), last-%d mean return %s; "
      "artifacts in %s\n",
      run.train_episodes, result.total_steps, tail, fmt_g9(tail_mean).c_str(),
      out.string().c_str());
  return 0;
}

int cmd_evaluate(const CliArgs& args) {
  RunConfig run = make_run(args);
  fs::path out = ensure_out_dir(run);
  GridEnv env = make_grid_env(run, args);
  if (args.checkpoint.empty()) throw ConfigError("evaluate needs --checkpoint");
  Td3Params params = load_checkpoint(args.checkpoint, run.td3);
  if (params.state_dim != env.obs_dim() ||
      params.action_dim != env.action_dim())
    throw ShapeError(
        "checkpoint was trained for obs/action dims " +
        std::to_string(params.state_dim) + "/" +
        std::to_string(params.action_dim) + " but the config's grid needs " +
        std::to_string(env.obs_dim()) + "/" +
        std::to_string(env.action_dim()));

  std::string lines;
  std::vector<GridState> strip;
  double return_sum = 0.0;
  for (int ep = 0; ep < run.rollout_episodes; ++ep) {
    Eigen::VectorXd obs = env.reset(derive_seed(run.seed, ep));
    if (ep == 0) strip.push_back(env.state());
    lines += state_line(0, env.state(), 0.0, false).dump() + "\n";
    bool done = false;
    while (!done) {
      Eigen::VectorXd a = params.actor.forward_one(obs);  // greedy
      GridStepResult r = env.step_detailed(a);
      lines += state_line(r.state.k, r.state, r.reward, r.done).dump() + "\n";
      obs = env.observation();
      return_sum += r.reward;
      done = r.done;
      if (ep == 0) strip.push_back(r.state);
    }
  }
  write_text_file((out / "eval_rollout.jsonl").string(), lines);
  write_density_strip_svg(strip, run.grid.n, out / "density_strip.svg");
  std::printf("evaluate: %d episode(s), mean return %s; artifacts in %s\n",
              run.rollout_episodes,
              fmt_g9(return_sum / run.rollout_episodes).c_str(),
              out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pursuit-evasion games, capture statistics and swarm engagement "
      "training"};
  app.require_subcommand(1);

  CliArgs sim_args, mc_args, mdp_args, train_args, eval_args;

  CLI::App* sim = app.add_subcommand(
      "simulate", "run one episode, write trajectory CSV and SVG snapshots");
  add_common(sim, sim_args, false);

  CLI::App* mc = app.add_subcommand(
      "montecarlo",
      "capture-time statistics; with --table also build the lookup table");
  add_common(mc, mc_args);
  mc->add_option("--runs", mc_args.runs, "override montecarlo.n_runs");

  CLI::App* mdp = app.add_subcommand(
      "mdp-rollout", "roll the grid environment with scripted actions");
  add_common(mdp, mdp_args);

  CLI::App* tr =
      app.add_subcommand("train", "train the TD3 allocation policy");
  add_common(tr, train_args);

  CLI::App* ev = app.add_subcommand(
      "evaluate", "greedy rollout of a trained policy with density plots");
  add_common(ev, eval_args);
  ev->add_option("--checkpoint", eval_args.checkpoint,
                 "trained policy weights");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (mc->parsed()) return cmd_montecarlo(mc_args);
    if (mdp->parsed()) return cmd_mdp_rollout(mdp_args);
    if (tr->parsed()) return cmd_train(train_args);
    if (ev->parsed()) return cmd_evaluate(eval_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
