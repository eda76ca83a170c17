#include <gtest/gtest.h>

#include "eev/error.h"
#include "eev/oracle.h"
#include "fixtures.h"

namespace eev {
namespace {

using testing::FixtureA;
using testing::Vec;

TEST(Attack, FindsWitness) {
  const EENetwork net = FixtureA();
  const QuerySpec q = make_query(net, Vec({0.2, 0}), 0.5);
  const auto w = attack_search(q);
  ASSERT_TRUE(w);
  EXPECT_TRUE(q.box().contains(*w));
  EXPECT_NE(infer(net, *w).predicted_class, q.winner);
}

TEST(Attack, NoneWhenRobust) {
  const EENetwork net = FixtureA();
  EXPECT_FALSE(attack_search(make_query(net, Vec({3, 0}), 0.2)));
  EXPECT_FALSE(attack_search(make_query(net, Vec({0.2, 0}), 0.0)));
}

TEST(Reference, FixtureVerdicts) {
  const EENetwork net = FixtureA();
  const OracleVerdict safe = decide_reference(make_query(net, Vec({3, 0}), 0.2));
  EXPECT_EQ(safe.status, OracleStatus::kSafe);
  EXPECT_TRUE(safe.decisive);
  const OracleVerdict unsafe = decide_reference(make_query(net, Vec({0.2, 0}), 0.5));
  EXPECT_EQ(unsafe.status, OracleStatus::kUnsafe);
  EXPECT_TRUE(unsafe.decisive);
  EXPECT_GT(unsafe.margin, 1e-3);
}

TEST(Reference, BoundaryIsUndecided) {
  // Robust, but only by a tie at the corner (1, 1).
  ReferenceConfig cfg;
  cfg.delta = 1e-4;
  const OracleVerdict v = decide_reference(make_query(FixtureA(), Vec({1.5, 0.5}), 0.5), cfg);
  EXPECT_EQ(v.status, OracleStatus::kUndecided);
  EXPECT_FALSE(v.decisive);
}

TEST(Reference, RefusesHighDimensionalCertification) {
  SyntheticSpec spec;
  spec.input_dim = 5;
  const EENetwork net = gen_synthetic(0, spec);
  const QuerySpec q = make_query(net, Vector::Zero(5), 1e-9);
  ReferenceConfig cfg;
  cfg.attack.grid_points_per_dim = 3;
  EXPECT_THROW(decide_reference(q, cfg), ValidationError);
}

TEST(TraceStability, Values) {
  const EENetwork net = FixtureA();
  EXPECT_EQ(trace_stability_estimate(make_query(net, Vec({0.2, 0}), 0.0), 100), 1.0);
  EXPECT_EQ(trace_stability_estimate(make_query(net, Vec({3, 0}), 0.2), 2000), 1.0);
  const double mixed = trace_stability_estimate(make_query(net, Vec({3, 0}), 0.5), 2000);
  EXPECT_GT(mixed, 0.0);
  EXPECT_LT(mixed, 1.0);
}

TEST(WinnerMargin, Sign) {
  const EENetwork net = FixtureA();
  EXPECT_NEAR(winner_margin(net, Vec({3, 0}), 0), testing::Sigmoid(3) - 0.9, 1e-12);
  EXPECT_DOUBLE_EQ(winner_margin(net, Vec({0.2, 0}), 0), 0.2);
  EXPECT_LT(winner_margin(net, Vec({0, 0.5}), 0), 0.0);
}

}  // namespace
}  // namespace eev
