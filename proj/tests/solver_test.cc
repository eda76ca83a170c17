#include <gtest/gtest.h>

#include <cmath>

#include "eev/atom.h"
#include "eev/error.h"
#include "eev/solver.h"
#include "fixtures.h"

namespace eev {
namespace {

using testing::FixtureA;
using testing::Vec;

const ExitId kExit1 = ExitId::Early(0);

TEST(Atom, ExactEvaluation) {
  const EENetwork net = FixtureA();
  EXPECT_TRUE(eval_atoms_exact(net, Vec({3, 0}), {{Atom::ProbGt(kExit1, 0, 0.9)}}));
  EXPECT_TRUE(eval_atoms_exact(net, Vec({0, 0}), {{Atom::NotArgmax(0)}}));
  EXPECT_FALSE(eval_atoms_exact(net, Vec({3, 0}), {{Atom::ProbLt(kExit1, 0, 0.1)}}));
  EXPECT_FALSE(eval_atoms_exact(net, Vec({0, 0}), {{Atom::ArgmaxLosesTo(0, 1)}}));
  EXPECT_TRUE(eval_atoms_exact(net, Vec({0, 1}), {{Atom::ArgmaxLosesTo(0, 1)}}));
}

LayerBounds ExitProbBox(double lo0, double hi0) {
  // Fixture bounds whose exit-1 class-0 probability spans [p(lo0), p(hi0)]
  // with class 1 pinned at 0.
  return propagate(FixtureA(), BoxDomain({{lo0, hi0}, {-1, 0}}));
}

TEST(Atom, IntervalStatus) {
  const double l95 = std::log(0.95 / 0.05), l99 = std::log(0.99 / 0.01);
  EXPECT_EQ(atom_status(Atom::ProbGt(kExit1, 0, 0.9), ExitProbBox(l95, l99)), AtomStatus::kAlways);
  // logit_0 = 0, logit_1 in [0, ln 9]: prob_0 in [0.1, 0.5].
  EXPECT_EQ(atom_status(Atom::ProbGt(kExit1, 0, 0.9), propagate(FixtureA(), BoxDomain({{0, 0}, {0, std::log(9.0)}}))),
            AtomStatus::kNever);
  EXPECT_EQ(atom_status(Atom::ProbGt(kExit1, 0, 0.9), ExitProbBox(0, 5)), AtomStatus::kMaybe);
  // logit_1.hi - logit_0.lo < 0 everywhere.
  EXPECT_EQ(atom_status(Atom::NotArgmax(0), propagate(FixtureA(), BoxDomain({{2, 3}, {0, 1}}))),
            AtomStatus::kNever);
  EXPECT_EQ(atom_status(Atom::NotArgmax(0), propagate(FixtureA(), BoxDomain({{0, 1}, {2, 3}}))),
            AtomStatus::kAlways);
}

TEST(Atom, Validate) {
  const EENetwork net = FixtureA();
  EXPECT_THROW(validate(net, {}), ValidationError);
  EXPECT_THROW(validate(net, {{Atom::ProbGt(ExitId::Early(1), 0, 0.9)}}), ValidationError);
  EXPECT_THROW(validate(net, {{Atom::ProbGt(kExit1, 2, 0.9)}}), ValidationError);
  EXPECT_THROW(validate(net, {{Atom::ArgmaxLosesTo(0, 0)}}), ValidationError);
  EXPECT_NO_THROW(validate(net, {{Atom::ProbGt(kExit1, 0, 2.0)}}));
}

TEST(Solve, ImpossibleAtomIsUnsat) {
  const SolveResult r = solve(FixtureA(), ball(Vec({0, 0}), 1.0), {{Atom::ProbGt(kExit1, 1, 2.0)}});
  EXPECT_EQ(r.status, SolveStatus::kUnsat);
  EXPECT_EQ(r.stats.subproblems, 1u);
}

TEST(Solve, DominanceUnsat) {
  const SolveResult r = solve(FixtureA(), ball(Vec({3, 0}), 0.5),
                              {{Atom::ArgmaxLosesTo(0, 1), Atom::ProbLt(kExit1, 0, 0.9)}});
  EXPECT_EQ(r.status, SolveStatus::kUnsat);
  EXPECT_FALSE(r.witness);
}

TEST(Solve, SatWithValidatedWitness) {
  const EENetwork net = FixtureA();
  const BoxDomain box = ball(Vec({0.2, 0}), 0.5);
  const Conjunction conj{{Atom::ArgmaxLosesTo(0, 1), Atom::ProbLt(kExit1, 0, 0.9)}};
  const SolveResult r = solve(net, box, conj);
  ASSERT_EQ(r.status, SolveStatus::kSat);
  ASSERT_TRUE(r.witness);
  EXPECT_TRUE(box.contains(*r.witness));
  EXPECT_TRUE(eval_atoms_exact(net, *r.witness, conj));
  // The grid confirms such points exist: (0, 0.5) has logits (0, 0.5).
  EXPECT_TRUE(eval_atoms_exact(net, Vec({0, 0.5}), conj));
}

TEST(Solve, BoundaryInstanceIsUnknown) {
  // NOT_ARGMAX(0) holds only at the corner (1, 1), so no interval proof
  // exists and no box centre ever lands on it.
  const EENetwork net = FixtureA();
  SolverConfig cfg;
  cfg.delta = 1e-3;
  // The strict variant is false everywhere, but the tie at the corner sits
  // inside the rounding bound of non-zero logits, so it stays undecided too.
  const SolveResult r = solve(net, BoxDomain({{1.0, 2.0}, {0.0, 1.0}}), {{Atom::ArgmaxLosesTo(0, 1)}}, cfg);
  EXPECT_EQ(r.status, SolveStatus::kUnknown);
  const SolveResult touching =
      solve(net, BoxDomain({{1.0, 2.0}, {0.0, 1.0}}), {{Atom::NotArgmax(0)}}, cfg);
  EXPECT_EQ(touching.status, SolveStatus::kUnknown);
  EXPECT_GT(touching.stats.residual_boxes, 0u);
  EXPECT_FALSE(touching.stats.budget_exhausted);
}

TEST(Solve, BudgetExhaustionIsUnknown) {
  SolverConfig cfg;
  cfg.max_subproblems = 3;
  const SolveResult r =
      solve(FixtureA(), BoxDomain({{1.0, 2.0}, {0.0, 1.0}}), {{Atom::NotArgmax(0)}}, cfg);
  EXPECT_EQ(r.status, SolveStatus::kUnknown);
  EXPECT_TRUE(r.stats.budget_exhausted);
  EXPECT_LE(r.stats.subproblems, 3u);
}

TEST(Solve, DeadlineIsUnknown) {
  SolverConfig cfg;
  cfg.delta = 1e-12;
  cfg.deadline = std::chrono::steady_clock::now();
  const SolveResult r =
      solve(FixtureA(), BoxDomain({{1.0, 2.0}, {0.0, 1.0}}), {{Atom::NotArgmax(0)}}, cfg);
  EXPECT_EQ(r.status, SolveStatus::kUnknown);
  EXPECT_TRUE(r.stats.timed_out);
}

TEST(Solve, ExactZeroPlateauIsPruned) {
  // Both logits are exactly 0 wherever x <= 0; the strict atom is refuted
  // there without splitting down to delta.
  const SolveResult r = solve(FixtureA(), BoxDomain({{-1.0, -0.5}, {-1.0, -0.5}}), {{Atom::ArgmaxLosesTo(0, 1)}});
  EXPECT_EQ(r.status, SolveStatus::kUnsat);
  EXPECT_EQ(r.stats.subproblems, 1u);
}

TEST(Solve, ParallelAgreesWithSequential) {
  SolverConfig par;
  par.deterministic = false;
  par.workers = 4;
  const EENetwork net = FixtureA();
  const Conjunction sat{{Atom::ArgmaxLosesTo(0, 1), Atom::ProbLt(kExit1, 0, 0.9)}};
  EXPECT_EQ(solve(net, ball(Vec({0.2, 0}), 0.5), sat, par).status, SolveStatus::kSat);
  EXPECT_EQ(solve(net, ball(Vec({3, 0}), 0.5), sat, par).status, SolveStatus::kUnsat);
}

TEST(Solve, RejectsBadConfig) {
  SolverConfig cfg;
  cfg.delta = 0;
  EXPECT_THROW(solve(FixtureA(), ball(Vec({0, 0}), 1), {{Atom::NotArgmax(0)}}, cfg), ValidationError);
}

TEST(Solve, DeterministicStats) {
  const EENetwork net = FixtureA();
  const Conjunction conj{{Atom::ProbLt(kExit1, 0, 0.9)}};
  const SolveResult a = solve(net, ball(Vec({3, 0}), 0.6), conj);
  const SolveResult b = solve(net, ball(Vec({3, 0}), 0.6), conj);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.stats.subproblems, b.stats.subproblems);
  EXPECT_EQ(a.witness.has_value(), b.witness.has_value());
  if (a.witness) EXPECT_EQ(*a.witness, *b.witness);
}

}  // namespace
}  // namespace eev
