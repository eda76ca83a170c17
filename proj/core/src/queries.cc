#include "eev/queries.h"

#include "eev/error.h"

namespace eev {
namespace {

const EENetwork& Net(const QuerySpec& q) {
  if (q.net == nullptr) throw ValidationError("query", "no network attached");
  return *q.net;
}

void CheckRunnerUp(const QuerySpec& q, std::size_t i) {
  if (i == q.winner) throw ValidationError("runner_up", "runner-up must differ from the winner");
  if (i >= Net(q).num_classes()) throw ValidationError("runner_up", "class out of range");
}

void CheckExit(const QuerySpec& q, ExitId k) {
  if (!Net(q).valid(k)) throw ValidationError("exit", "invalid exit " + k.label());
}

// PROB_LT(e, w, T_e) for every early exit e strictly before `k`.
void AppendWinnerSilent(const QuerySpec& q, ExitId k, std::vector<Atom>& atoms) {
  const EENetwork& net = Net(q);
  for (std::size_t e = 0; e < net.num_exits(); ++e) {
    const ExitId id = ExitId::Early(e);
    if (!(id < k)) break;
    atoms.push_back(Atom::ProbLt(id, q.winner, net.exits()[e].threshold));
  }
}

}  // namespace

QuerySpec make_query(const EENetwork& net, const Vector& x, double eps,
                     std::optional<ClipRange> clip) {
  QuerySpec q;
  q.net = &net;
  q.center = x;
  q.eps = eps;
  q.clip = clip;
  const InferenceResult r = infer(net, x);
  q.winner = r.predicted_class;
  q.inference_exit = r.exit_index;
  (void)q.box();  // reject empty clipped balls up front
  return q;
}

Conjunction runner_up_query(const QuerySpec& q, ExitId k, std::size_t i) {
  CheckExit(q, k);
  CheckRunnerUp(q, i);
  Conjunction conj;
  if (k.is_last()) {
    conj.atoms.push_back(Atom::ArgmaxLosesTo(q.winner, i));
  } else {
    conj.atoms.push_back(Atom::ProbGt(k, i, Net(q).exit(k).threshold));
  }
  AppendWinnerSilent(q, k, conj.atoms);
  return conj;
}

Conjunction break_query(const QuerySpec& q, ExitId k) {
  CheckExit(q, k);
  if (k.is_last()) return {{Atom::NotArgmax(q.winner)}};
  return {{Atom::ProbLt(k, q.winner, Net(q).exit(k).threshold)}};
}

Conjunction continue_check(const QuerySpec& q, ExitId k) {
  CheckExit(q, k);
  if (k.is_last()) throw ValidationError("exit", "the continue check does not apply to LAST");
  return {{Atom::ProbLt(k, q.winner, 1.0 - Net(q).exit(k).threshold)}};
}

Conjunction vanilla_query(const QuerySpec& q, std::size_t i) {
  CheckRunnerUp(q, i);
  return {{Atom::ArgmaxLosesTo(q.winner, i)}};
}

std::vector<RunnerUpTerm> negated_robustness(const QuerySpec& q) {
  std::vector<RunnerUpTerm> terms;
  for (ExitId k : Net(q).exit_ids()) {
    for (std::size_t i = 0; i < Net(q).num_classes(); ++i) {
      if (i == q.winner) continue;
      terms.push_back({k, i, runner_up_query(q, k, i)});
    }
  }
  return terms;
}

}  // namespace eev
