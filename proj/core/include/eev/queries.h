#pragma once

#include <optional>
#include <vector>

#include "eev/atom.h"
#include "eev/interval.h"
#include "eev/network.h"

namespace eev {

// A local-robustness question: is every point of the eps-ball around
// `center` classified as `winner` under early-exit inference?
struct QuerySpec {
  const EENetwork* net = nullptr;
  Vector center;
  double eps = 0.0;
  std::optional<ClipRange> clip;
  std::size_t winner = 0;        // infer(net, center).predicted_class
  ExitId inference_exit = ExitId::Last();

  BoxDomain box() const { return ball(center, eps, clip); }
};

// Builds a QuerySpec, computing the winner by early-exit inference.
QuerySpec make_query(const EENetwork& net, const Vector& x, double eps,
                     std::optional<ClipRange> clip = std::nullopt);

// Runner-up `i` wins at exit `k` while the winner fired at no earlier exit.
//   early k: { PROB_GT(k, i, T_k) } + { PROB_LT(e, w, T_e) : e < k }
//   LAST   : { ARGMAX_LOSES_TO(w, i) } + { PROB_LT(e, w, T_e) : every early e }
Conjunction runner_up_query(const QuerySpec& q, ExitId k, std::size_t i);

// SAT iff the winner can fail to clear exit k:
//   early k: { PROB_LT(k, w, T_k) }, LAST: { NOT_ARGMAX(w) }.
Conjunction break_query(const QuerySpec& q, ExitId k);

// SAT iff the winner's probability at early exit k can drop below 1 - T_k.
// UNSAT means no runner-up can exceed T_k there.
Conjunction continue_check(const QuerySpec& q, ExitId k);

// Exit-free robustness: { ARGMAX_LOSES_TO(w, i) } at the last layer.
Conjunction vanilla_query(const QuerySpec& q, std::size_t i);

// Every (k, i) runner-up conjunction, in iteration order. Their union is
// the negated early-exit robustness property.
struct RunnerUpTerm {
  ExitId exit;
  std::size_t runner_up;
  Conjunction conj;
};
std::vector<RunnerUpTerm> negated_robustness(const QuerySpec& q);

}  // namespace eev
