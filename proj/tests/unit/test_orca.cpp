#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sfmnav/orca.hpp"

using namespace sfmnav;

namespace {

OrcaAgentView agent(Vec2 p, Vec2 pref, Vec2 v = {}) {
  OrcaAgentView a;
  a.position = p;
  a.velocity = v;
  a.preferred_velocity = pref;
  return a;
}

const OrcaConfig kConfig{};

double min_pair_distance(const std::vector<OrcaAgentView>& agents) {
  double best = INFINITY;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      best = std::min(best, norm(agents[i].position - agents[j].position));
    }
  }
  return best;
}

// Advances all agents with ORCA, re-aiming preferred velocities at goals.
double simulate(std::vector<OrcaAgentView> agents, const std::vector<Vec2>& goals,
                const std::vector<LineObstacle>& obstacles, int steps) {
  double closest = min_pair_distance(agents);
  for (int s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const Vec2 d = goals[i] - agents[i].position;
      const double n = norm(d);
      agents[i].preferred_velocity = n < 1e-9 ? Vec2{} : d * (std::min(1.0, n / kConfig.time_step) / n);
    }
    const std::vector<Vec2> v = step_all_orca(agents, obstacles, kConfig);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      agents[i].velocity = v[i];
      agents[i].position += kConfig.time_step * v[i];
    }
    closest = std::min(closest, min_pair_distance(agents));
  }
  return closest;
}

}  // namespace

TEST(Orca, UnconstrainedReturnsPreferred) {
  EXPECT_EQ(orca_velocity(agent({0, 0}, {1, 0}), {}, {}, kConfig), Vec2(1, 0));
}

TEST(Orca, FarNeighboursAreInactive) {
  const std::vector<OrcaAgentView> a{agent({0, 0}, {1, 0}), agent({100, 0}, {1, 0})};
  const std::vector<Vec2> v = step_all_orca(a, {}, kConfig);
  EXPECT_EQ(v[0], Vec2(1, 0));
  EXPECT_EQ(v[1], Vec2(1, 0));
}

TEST(Orca, SingleAgentGetsPreferred) {
  const std::vector<OrcaAgentView> a{agent({3, 2}, {0.6, -0.8})};
  const std::vector<Vec2> v = step_all_orca(a, {}, kConfig);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NEAR(v[0].x, 0.6, 1e-12);
  EXPECT_NEAR(v[0].y, -0.8, 1e-12);
}

TEST(Orca, HeadOnPairNeverCollides) {
  const std::vector<OrcaAgentView> a{agent({-2, 0}, {1, 0}), agent({2, 0}, {-1, 0})};
  EXPECT_GT(simulate(a, {{2, 0}, {-2, 0}}, {}, 200), 0.6);
}

TEST(Orca, FourAntipodalAgentsNeverOverlap) {
  std::vector<OrcaAgentView> a;
  std::vector<Vec2> goals;
  for (int k = 0; k < 4; ++k) {
    const double phi = k * std::numbers::pi / 2 + 0.1;
    const Vec2 p{4 * std::cos(phi), 4 * std::sin(phi)};
    a.push_back(agent(p, {}));
    goals.push_back(-p);
  }
  EXPECT_GT(simulate(a, goals, {}, 120), 0.6);
}

TEST(Orca, RandomCrowdsNeverOverlap) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
  for (int scene = 0; scene < 10; ++scene) {
    std::vector<OrcaAgentView> a;
    std::vector<Vec2> goals;
    while (a.size() < 6) {
      const double phi = angle(rng);
      const Vec2 p{4 * std::cos(phi), 4 * std::sin(phi)};
      bool ok = true;
      for (const auto& o : a) ok = ok && norm(o.position - p) > 0.8;
      if (!ok) continue;
      a.push_back(agent(p, {}));
      goals.push_back(-p);
    }
    EXPECT_GT(simulate(a, goals, {}, 100), 0.6) << "scene " << scene;
  }
}

TEST(Orca, SpeedNeverExceedsMax) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 200; ++i) {
    std::vector<OrcaAgentView> n;
    for (int k = 0; k < 5; ++k) n.push_back(agent({u(rng), u(rng)}, {}, {u(rng) / 3, u(rng) / 3}));
    OrcaAgentView self = agent({u(rng), u(rng)}, normalized(Vec2{u(rng), u(rng)}));
    self.max_speed = 0.5 + std::abs(u(rng)) / 3;
    self.preferred_velocity = self.preferred_velocity * self.max_speed;
    const Vec2 v = orca_velocity(self, n, square_obstacle({0.5, 0.5}, 0.6), kConfig);
    EXPECT_TRUE(is_finite(v));
    EXPECT_LE(norm(v), self.max_speed + 1e-9);
  }
}

TEST(Orca, TranslationEquivariant) {
  const std::vector<OrcaAgentView> a{agent({-1, 0.1}, {1, 0}, {0.5, 0}), agent({1, 0}, {-1, 0}, {-0.5, 0}),
                                     agent({0, 1.2}, {0, -1})};
  std::vector<OrcaAgentView> b = a;
  for (auto& x : b) x.position += Vec2{7.25, -3.5};
  const std::vector<Vec2> va = step_all_orca(a, {}, kConfig);
  const std::vector<Vec2> vb = step_all_orca(b, {}, kConfig);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(va[i].x, vb[i].x, 1e-9);
    EXPECT_NEAR(va[i].y, vb[i].y, 1e-9);
  }
}

TEST(Orca, DeterministicOutputs) {
  const std::vector<OrcaAgentView> a{agent({-1, 0}, {1, 0}), agent({1, 0.05}, {-1, 0})};
  EXPECT_EQ(step_all_orca(a, {}, kConfig), step_all_orca(a, {}, kConfig));
}

TEST(Orca, WallLimitsApproachSpeed) {
  // Wall along x = 0.5 from y = -3 to 3, agent at the origin heading +x.
  const std::vector<LineObstacle> wall = segment_obstacle({0.5, -3}, {0.5, 3});
  const OrcaAgentView self = agent({0, 0}, {1, 0});
  const Vec2 v = orca_velocity(self, {}, wall, kConfig);
  // Obstacle half-plane: v.x <= (distance - radius) / tau_obstacles.
  EXPECT_LE(v.x, (0.5 - 0.3) / kConfig.time_horizon_obstacles + 1e-9);
}

double closest_to_square(double offset, OrcaAgentView& self) {
  const std::vector<LineObstacle> square = square_obstacle({0, 0}, 0.6);
  self = agent({-3, offset}, {1, 0});
  double closest = INFINITY;
  for (int s = 0; s < 60; ++s) {
    self.preferred_velocity = normalized(Vec2{3, 0} - self.position);
    self.velocity = orca_velocity(self, {}, square, kConfig);
    self.position += kConfig.time_step * self.velocity;
    double d = INFINITY;
    for (const LineObstacle& e : square) d = std::min(d, point_segment_distance(e.endpoint_a, e.endpoint_b, self.position));
    closest = std::min(closest, d);
  }
  return closest;
}

TEST(Orca, AgentKeepsClearOfSquare) {
  OrcaAgentView self;
  // Nearly head-on the agent stalls in front of the face; it never touches.
  EXPECT_GT(closest_to_square(0.05, self), 0.3 - 1e-6);
  EXPECT_LT(self.position.x, -0.3);
  // Off-centre it slides past the corner.
  EXPECT_GT(closest_to_square(0.65, self), 0.3 - 1e-6);
  EXPECT_GT(self.position.x, 0.0);
}

TEST(Orca, SquareOutlineIsCounterClockwise) {
  const std::vector<LineObstacle> sq = square_obstacle({1, 2}, 0.6);
  ASSERT_EQ(sq.size(), 4u);
  double area = 0;
  for (const LineObstacle& e : sq) {
    area += det(e.endpoint_a, e.endpoint_b);
    EXPECT_TRUE(e.convex_a);
  }
  EXPECT_NEAR(area / 2, 0.36, 1e-12);
}

TEST(Orca, ConfigValidation) {
  OrcaConfig c;
  c.time_horizon_agents = 0;
  EXPECT_ANY_THROW(c.validate());
  EXPECT_NO_THROW(OrcaConfig{}.validate());
}
