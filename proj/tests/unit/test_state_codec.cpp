#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sfmnav/state_codec.hpp"

using namespace sfmnav;

namespace {

World single_entity_world() {
  World w = empty_world(ScenarioConfig{});
  w.robot.velocity = {0, 1};
  AgentBody h;
  h.id = 1;
  h.position = {1, -4};
  h.radius = 0.3;
  w.humans.push_back(h);
  return w;
}

World transformed(const World& w, double phi, const Vec2& shift) {
  World out = w;
  auto move = [&](AgentBody& b) {
    b.position = rotated(b.position, phi) + shift;
    b.goal = rotated(b.goal, phi) + shift;
    b.velocity = rotated(b.velocity, phi);
  };
  move(out.robot);
  for (AgentBody& h : out.humans) move(h);
  for (AgentBody& c : out.obstacle_cores) move(c);
  return out;
}

void expect_near(const Vec2& a, const Vec2& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
}

}  // namespace

TEST(Encode, RotatesIntoGoalFrame) {
  const JointState j = encode(single_entity_world(), false);
  EXPECT_NEAR(j.self_state.d_g, 8.0, 1e-12);
  expect_near(j.self_state.v, {1, 0}, 1e-12);
  ASSERT_EQ(j.entities.size(), 1u);
  expect_near(j.entities[0].p, {0, -1}, 1e-12);
  EXPECT_NEAR(j.entities[0].d_i, 1.0, 1e-12);
  EXPECT_EQ(j.entities[0].r_sum, 0.6);
  EXPECT_FALSE(j.entities[0].f.has_value());
  EXPECT_FALSE(j.self_state.F.has_value());
  EXPECT_EQ(j.self_state.theta, 0.0);
}

TEST(Encode, ForceMatchesRotatedRepulsion) {
  const JointState j = encode(single_entity_world(), true);
  ASSERT_TRUE(j.entities[0].f.has_value());
  // World-frame force (-1/e, 0) rotated by -pi/2 by hand.
  const double fx = -std::exp(-1.0), fy = 0.0;
  const double c = std::cos(-std::numbers::pi / 2), s = std::sin(-std::numbers::pi / 2);
  expect_near(*j.entities[0].f, {c * fx - s * fy, s * fx + c * fy}, 1e-12);
  expect_near(*j.entities[0].f, {0, std::exp(-1.0)}, 1e-12);
  expect_near(*j.self_state.F, *j.entities[0].f, 1e-15);
}

TEST(Encode, PlainAndForceAgreeOnSharedFields) {
  const World w = generate_scenario(5, 2, ScenarioConfig{});
  const JointState a = encode(w, false);
  const JointState b = encode(w, true);
  EXPECT_EQ(a.self_state.d_g, b.self_state.d_g);
  EXPECT_EQ(a.self_state.v, b.self_state.v);
  ASSERT_EQ(a.entities.size(), b.entities.size());
  for (std::size_t i = 0; i < a.entities.size(); ++i) {
    EXPECT_EQ(a.entities[i].p, b.entities[i].p);
    EXPECT_EQ(a.entities[i].d_i, b.entities[i].d_i);
    EXPECT_TRUE(b.entities[i].f.has_value());
  }
}

TEST(Encode, CoresHaveZeroVelocityAndComeLast) {
  const World w = generate_scenario(5, 8, ScenarioConfig{});
  const JointState j = encode(w, false);
  ASSERT_EQ(j.entities.size(), w.humans.size() + w.obstacle_cores.size());
  for (std::size_t i = w.humans.size(); i < j.entities.size(); ++i) EXPECT_EQ(j.entities[i].v, Vec2(0, 0));
}

TEST(Encode, FrameInvariant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi), shift(-20, 20);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    World w = generate_scenario(1 + static_cast<int>(seed % 5), seed, ScenarioConfig{});
    for (int k = 0; k < 3; ++k) w = step(w, {0.3, 0.5}).first;
    for (bool forces : {false, true}) {
      const StateMatrix base = encode_flat(w, forces);
      for (int t = 0; t < 5; ++t) {
        const StateMatrix moved = encode_flat(transformed(w, angle(rng), {shift(rng), shift(rng)}), forces);
        EXPECT_LT((base - moved).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
  }
}

TEST(Encode, OnGoalUsesZeroAngle) {
  World w = empty_world(ScenarioConfig{});
  w.robot.position = w.robot.goal;
  EXPECT_EQ(goal_frame_angle(w.robot), 0.0);
}

TEST(Flatten, ShapesAndLayout) {
  const World w = generate_scenario(2, 1, ScenarioConfig{});
  ASSERT_EQ(w.humans.size() + w.obstacle_cores.size(), 10u);
  const StateMatrix plain = encode_flat(w, false);
  EXPECT_EQ(plain.rows(), 10);
  EXPECT_EQ(plain.cols(), 13);
  const StateMatrix forced = encode_flat(w, true);
  EXPECT_EQ(forced.cols(), 17);

  const JointState j = encode(w, true);
  EXPECT_EQ(forced(3, 0), j.self_state.d_g);
  EXPECT_EQ(forced(3, 6), j.self_state.F->x);
  EXPECT_EQ(forced(3, 8), j.entities[3].p.x);
  EXPECT_EQ(forced(3, 13), j.entities[3].d_i);
  EXPECT_EQ(forced(3, 16), j.entities[3].f->y);
}

TEST(Flatten, PermutingEntitiesPermutesRows) {
  const World w = generate_scenario(3, 2, ScenarioConfig{});
  JointState j = encode(w, true);
  const StateMatrix a = flatten(j);
  std::reverse(j.entities.begin(), j.entities.end());
  const StateMatrix b = flatten(j);
  for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_EQ(a.row(i), b.row(a.rows() - 1 - i));
}

TEST(Flatten, EmptySceneGetsNullEntity) {
  const StateMatrix m = encode_flat(empty_world(ScenarioConfig{}), false);
  ASSERT_EQ(m.rows(), 1);
  EXPECT_EQ(m(0, 6), 100.0);  // p_x
  EXPECT_EQ(m(0, 8), 0.0);    // v_x
  EXPECT_EQ(m(0, 10), 0.0);   // r_i
  EXPECT_EQ(m(0, 11), 100.0); // d_i
}
