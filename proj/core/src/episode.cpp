#include "sfmnav/episode.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sfmnav/error.hpp"
#include "sfmnav/sfm_forces.hpp"

namespace sfmnav {

using json = nlohmann::ordered_json;

Vec2 OrcaPolicy::act(const World& world) {
  const AgentBody& robot = world.robot;
  OrcaAgentView self;
  self.position = robot.position;
  self.velocity = robot.velocity;
  self.radius = robot.radius;
  self.preferred_velocity = preferred_velocity(robot.position, robot.goal, robot.v_pref);
  self.max_speed = robot.v_pref;

  std::vector<OrcaAgentView> neighbors;
  for (const AgentBody* e : world.entities()) {
    OrcaAgentView view;
    view.position = e->position;
    view.velocity = e->velocity;
    view.radius = e->radius;
    view.max_speed = std::max(e->v_pref, 1e-9);
    neighbors.push_back(view);
  }
  return orca_velocity(self, neighbors, {}, world.orca);
}

RewardInput reward_input(const World& before, const Vec2& action, const World& after,
                         const StepEvent& event) {
  RewardInput input;
  input.min_dt = event.min_separation;
  input.reached_goal = event.outcome == Outcome::ReachedGoal;
  input.v = action;
  input.v_pref_vec = preferred_velocity(before.robot.position, before.robot.goal, before.robot.v_pref);
  input.d_g = norm(after.robot.goal - after.robot.position);
  input.t = after.time();
  return input;
}

namespace {

TrajectoryFrame frame_of(const World& world) {
  TrajectoryFrame frame;
  frame.time = world.time();
  frame.robot = world.robot;
  for (const AgentBody* e : world.entities()) frame.entities.push_back(*e);
  return frame;
}

json body_to_json(const AgentBody& b) {
  return json::array({b.id, to_string(b.kind), b.position.x, b.position.y, b.velocity.x, b.velocity.y, b.radius,
                      b.goal.x, b.goal.y, b.v_pref});
}

AgentBody body_from_json(const json& j) {
  if (!j.is_array() || j.size() != 10) throw Error("malformed body record");
  AgentBody b;
  b.id = j[0].get<int>();
  b.kind = entity_kind_from_string(j[1].get<std::string>());
  b.position = {j[2].get<double>(), j[3].get<double>()};
  b.velocity = {j[4].get<double>(), j[5].get<double>()};
  b.radius = j[6].get<double>();
  b.goal = {j[7].get<double>(), j[8].get<double>()};
  b.v_pref = j[9].get<double>();
  return b;
}

}  // namespace

EpisodeRecord run_episode_from(Policy& policy, World world, const RewardSpec& reward_spec,
                               const EpisodeOptions& options) {
  EpisodeRecord record;
  record.env_id = world.env_id;
  record.seed = world.rng_seed;
  record.obstacles = world.obstacles;
  if (options.record_trajectory) record.trajectory.push_back(frame_of(world));

  const double discount_base = world.time_step * world.robot.v_pref;
  for (;;) {
    const Vec2 action = policy.act(world);
    auto [next, event] = step(world, action);
    const double reward = compute_reward(reward_input(world, action, next, event), reward_spec);
    record.cumulative_reward += std::pow(options.gamma, record.steps * discount_base) * reward;
    if (options.observer) options.observer(world, action, next, event, reward);
    ++record.steps;
    world = std::move(next);
    if (options.record_trajectory) record.trajectory.push_back(frame_of(world));
    if (event.outcome != Outcome::Running) {
      record.outcome = event.outcome;
      if (event.outcome == Outcome::ReachedGoal) record.nav_time = world.time();
      break;
    }
  }
  return record;
}

EpisodeRecord run_episode(Policy& policy, const ScenarioConfig& scenario, int env_id,
                          std::uint64_t seed, const RewardSpec& reward_spec,
                          const EpisodeOptions& options) {
  policy.reset(seed);
  return run_episode_from(policy, generate_scenario(env_id, seed, scenario), reward_spec, options);
}

void write_episode(const EpisodeRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());

  json header;
  header["type"] = "episode";
  header["env_id"] = record.env_id;
  header["seed"] = record.seed;
  header["outcome"] = to_string(record.outcome);
  header["nav_time"] = record.nav_time ? json(*record.nav_time) : json(nullptr);
  header["cumulative_reward"] = record.cumulative_reward;
  header["steps"] = record.steps;
  json obstacles = json::array();
  for (const SquareObstacle& o : record.obstacles) {
    obstacles.push_back(json::array({o.center.x, o.center.y, o.side, o.core_agent_id}));
  }
  header["obstacles"] = obstacles;
  out << header.dump() << '\n';

  for (const TrajectoryFrame& frame : record.trajectory) {
    json line;
    line["type"] = "step";
    line["t"] = frame.time;
    line["robot"] = body_to_json(frame.robot);
    json entities = json::array();
    for (const AgentBody& e : frame.entities) entities.push_back(body_to_json(e));
    line["entities"] = entities;
    out << line.dump() << '\n';
  }
  if (!out) throw Error("failed writing episode: " + path.string());
}

EpisodeRecord read_episode(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open episode file: " + path.string());

  EpisodeRecord record;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "episode") {
        record.env_id = j.at("env_id").get<int>();
        record.seed = j.at("seed").get<std::uint64_t>();
        record.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        if (!j.at("nav_time").is_null()) record.nav_time = j.at("nav_time").get<double>();
        record.cumulative_reward = j.at("cumulative_reward").get<double>();
        record.steps = j.at("steps").get<int>();
        for (const json& o : j.at("obstacles")) {
          record.obstacles.push_back(
              SquareObstacle{{o.at(0).get<double>(), o.at(1).get<double>()}, o.at(2).get<double>(), o.at(3).get<int>()});
        }
        have_header = true;
      } else if (type == "step") {
        TrajectoryFrame frame;
        frame.time = j.at("t").get<double>();
        frame.robot = body_from_json(j.at("robot"));
        for (const json& e : j.at("entities")) frame.entities.push_back(body_from_json(e));
        record.trajectory.push_back(std::move(frame));
      } else {
        throw Error("unknown record type " + type);
      }
    } catch (const std::exception& e) {
      throw Error("malformed episode file " + path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error("malformed episode file " + path.string() + ": missing episode header");
  return record;
}

}  // namespace sfmnav
