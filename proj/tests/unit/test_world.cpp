#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "sfmnav/error.hpp"
#include "sfmnav/world.hpp"

using namespace sfmnav;

namespace {

const ScenarioConfig kScenario{};

void expect_no_overlap(const World& w) {
  std::vector<const AgentBody*> all{&w.robot};
  for (const AgentBody* e : w.entities()) all.push_back(e);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double d = norm(all[i]->position - all[j]->position);
      // Barrier squares touch their neighbours exactly.
      if (all[i]->kind == EntityKind::ObstacleCore && all[j]->kind == EntityKind::ObstacleCore) {
        EXPECT_GE(d, all[i]->radius + all[j]->radius - 1e-9);
      } else {
        EXPECT_GT(d, all[i]->radius + all[j]->radius);
      }
    }
  }
}

}  // namespace

TEST(Scenario, EnvOneHasTenElements) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const World w = generate_scenario(1, seed, kScenario);
    EXPECT_EQ(w.humans.size() + w.obstacles.size(), 10u);
    EXPECT_EQ(w.robot.position, Vec2(0, -4));
    EXPECT_EQ(w.robot.goal, Vec2(0, 4));
    EXPECT_EQ(w.obstacles.size(), w.obstacle_cores.size());
    EXPECT_EQ(w.obstacle_edges.size(), 4 * w.obstacles.size());
    expect_no_overlap(w);
  }
}

TEST(Scenario, EnvOneHumanShareNearSixtyPercent) {
  std::size_t humans = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const World w = generate_scenario(1, seed, kScenario);
    humans += w.humans.size();
    total += 10;
  }
  EXPECT_NEAR(static_cast<double>(humans) / total, 0.6, 0.04);
}

TEST(Scenario, EnvTwoConcaveBarrier) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const World w = generate_scenario(2, seed, kScenario);
    ASSERT_EQ(w.humans.size(), 5u);
    ASSERT_EQ(w.obstacles.size(), 5u);
    // Each square touches at least one other; the chain is connected.
    for (std::size_t i = 0; i < 5; ++i) {
      double nearest_gap = INFINITY;
      for (std::size_t j = 0; j < 5; ++j) {
        if (i == j) continue;
        const Vec2 d = w.obstacles[i].center - w.obstacles[j].center;
        const double gap = std::max(std::abs(d.x), std::abs(d.y)) - w.obstacles[i].side;
        nearest_gap = std::min(nearest_gap, gap);
      }
      EXPECT_LT(std::abs(nearest_gap), 1e-6);
    }
    // Opening faces the robot: the returns sit below the wall.
    double wall_y = -INFINITY, lowest = INFINITY;
    for (const SquareObstacle& o : w.obstacles) {
      wall_y = std::max(wall_y, o.center.y);
      lowest = std::min(lowest, o.center.y);
    }
    EXPECT_LT(lowest, wall_y);
    expect_no_overlap(w);
  }
}

TEST(Scenario, OtherEnvironmentsAreValid) {
  for (int env = 3; env <= 5; ++env) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const World w = generate_scenario(env, seed, kScenario);
      const EnvLayout& layout = kScenario.environments.at(env);
      EXPECT_EQ(static_cast<int>(w.humans.size()), layout.humans);
      int squares = layout.concave != ConcavePlacement::None ? 5 : 0;
      for (int n : layout.straight_barriers) squares += n;
      EXPECT_EQ(static_cast<int>(w.obstacles.size()), squares);
      expect_no_overlap(w);
    }
  }
}

TEST(Scenario, IdsUniqueAndOrdered) {
  const World w = generate_scenario(5, 4, kScenario);
  std::set<int> ids{w.robot.id};
  int prev = w.robot.id;
  for (const AgentBody* e : w.entities()) {
    EXPECT_GT(e->id, prev);
    prev = e->id;
    ids.insert(e->id);
  }
  EXPECT_EQ(ids.size(), 1 + w.humans.size() + w.obstacle_cores.size());
  for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
    EXPECT_EQ(w.obstacles[i].core_agent_id, w.obstacle_cores[i].id);
    EXPECT_EQ(w.obstacles[i].center, w.obstacle_cores[i].position);
    EXPECT_EQ(w.obstacles[i].side, 2 * w.obstacle_cores[i].radius);
  }
}

TEST(Scenario, Deterministic) {
  EXPECT_EQ(generate_scenario(3, 99, kScenario), generate_scenario(3, 99, kScenario));
  EXPECT_NE(generate_scenario(3, 99, kScenario), generate_scenario(3, 100, kScenario));
}

TEST(Scenario, UnknownEnvAndInfeasible) {
  EXPECT_THROW(generate_scenario(9, 0, kScenario), Error);
  ScenarioConfig crowded = kScenario;
  crowded.environments[1].random_elements = 400;
  crowded.max_attempts = 50;
  try {
    generate_scenario(1, 0, crowded);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("scenario infeasible"), std::string::npos);
  }
}

TEST(Step, EulerStepAlone) {
  const World w = empty_world(kScenario);
  const auto [next, event] = step(w, {0, 1});
  EXPECT_NEAR(next.robot.position.y, -3.75, 1e-15);
  EXPECT_EQ(event.outcome, Outcome::Running);
  EXPECT_TRUE(std::isinf(event.min_separation));
  EXPECT_EQ(next.step_index, 1);
}

TEST(Step, ReachesGoal) {
  World w = empty_world(kScenario);
  w.robot.position = {0, 3.65};
  EXPECT_EQ(step(w, {0, 1}).second.outcome, Outcome::ReachedGoal);
}

TEST(Step, OverlapWithCoreCollides) {
  World w = empty_world(kScenario);
  w.robot.position = {0, 0};
  add_square_obstacle(w, {0.55, 0}, 0.6);
  const auto [next, event] = step(w, {0, 0});
  EXPECT_EQ(event.outcome, Outcome::Collision);
  EXPECT_NEAR(event.min_separation, -0.05, 1e-12);
}

TEST(Step, SweptCollisionIsDetected) {
  // The robot jumps through a core within one step without overlapping it
  // at either end.
  World w = empty_world(kScenario);
  w.time_step = 1.0;
  w.robot.position = {-0.5, 0};
  w.robot.goal = {5, 0};
  add_square_obstacle(w, {0, 0}, 0.2);
  const auto [next, event] = step(w, {1, 0});
  EXPECT_GT(norm(next.robot.position), 0.4);
  EXPECT_EQ(event.outcome, Outcome::Collision);
}

TEST(Step, CollisionBeatsGoal) {
  World w = empty_world(kScenario);
  w.robot.position = {0, 3.75};
  add_square_obstacle(w, {0.4, 4}, 0.6);
  EXPECT_EQ(step(w, {0, 1}).second.outcome, Outcome::Collision);
}

TEST(Step, TimeoutAtLimit) {
  World w = empty_world(kScenario);
  StepEvent event;
  int steps = 0;
  while (event.outcome == Outcome::Running) {
    std::tie(w, event) = step(w, {0, 0});
    ++steps;
  }
  EXPECT_EQ(event.outcome, Outcome::Timeout);
  EXPECT_EQ(steps, 100);
  EXPECT_DOUBLE_EQ(w.time(), 25.0);
}

TEST(Step, IllegalActionThrows) {
  const World w = empty_world(kScenario);
  EXPECT_THROW(step(w, {1.0, 0.1}), Error);
  EXPECT_NO_THROW(step(w, {1.0, 0.0}));
}

TEST(Step, CoresStayPutAndEntitiesConserved) {
  World w = generate_scenario(4, 1, kScenario);
  const World start = w;
  for (int i = 0; i < 40; ++i) w = step(w, {0, 0}).first;
  ASSERT_EQ(w.obstacle_cores.size(), start.obstacle_cores.size());
  ASSERT_EQ(w.humans.size(), start.humans.size());
  for (std::size_t i = 0; i < w.obstacle_cores.size(); ++i) {
    EXPECT_EQ(w.obstacle_cores[i].position, start.obstacle_cores[i].position);
    EXPECT_EQ(w.obstacle_cores[i].velocity, Vec2(0, 0));
  }
}

TEST(Step, HumansAvoidEachOtherAndStopAtGoal) {
  World w = generate_scenario(2, 5, kScenario);
  w.robot.position = {20, 20};  // out of the way
  w.robot.goal = {20, 30};
  for (int i = 0; i < 100; ++i) {
    w = step(w, {0, 0}).first;
    for (std::size_t a = 0; a < w.humans.size(); ++a) {
      for (std::size_t b = a + 1; b < w.humans.size(); ++b) {
        EXPECT_GT(norm(w.humans[a].position - w.humans[b].position), 0.6 - 1e-9);
      }
    }
  }
}

TEST(Propagate, LinearExtrapolation) {
  World w = generate_scenario(1, 3, kScenario);
  w.humans.at(0).velocity = {0.5, -0.25};
  const World p = propagate_linear(w, {0, 1});
  EXPECT_EQ(p.humans[0].position, w.humans[0].position + 0.25 * Vec2(0.5, -0.25));
  EXPECT_EQ(p.robot.position, Vec2(0, -3.75));
  EXPECT_EQ(p.robot.velocity, Vec2(0, 1));
  EXPECT_EQ(p.step_index, 1);
}

TEST(ClosestApproach, SegmentDistance) {
  EXPECT_NEAR(closest_approach({-1, 1}, {1, 1}), 1.0, 1e-15);
  EXPECT_NEAR(closest_approach({2, 0}, {3, 0}), 2.0, 1e-15);
}

TEST(Names, RoundTrip) {
  for (Outcome o : {Outcome::Running, Outcome::ReachedGoal, Outcome::Collision, Outcome::Timeout}) {
    EXPECT_EQ(outcome_from_string(to_string(o)), o);
  }
  for (EntityKind k : {EntityKind::Robot, EntityKind::Human, EntityKind::ObstacleCore}) {
    EXPECT_EQ(entity_kind_from_string(to_string(k)), k);
  }
}
