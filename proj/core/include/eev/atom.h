#pragma once

#include <string>
#include <vector>

#include "eev/interval.h"
#include "eev/network.h"

namespace eev {

// Constraint atoms over exit scores. Semantics at a point x:
//   kProbGt        SoftMax(logits at exit)[cls] > bound
//   kProbLt        SoftMax(logits at exit)[cls] < bound
//   kNotArgmax     at the last layer, some i != winner has logit_i >= logit_winner
//   kArgmaxLosesTo at the last layer, logit_cls > logit_winner
enum class AtomKind { kProbGt, kProbLt, kNotArgmax, kArgmaxLosesTo };

struct Atom {
  AtomKind kind = AtomKind::kProbGt;
  ExitId exit = ExitId::Last();
  std::size_t cls = 0;     // probability class, or the runner-up for kArgmaxLosesTo
  std::size_t winner = 0;  // last-layer kinds only
  double bound = 0.0;      // probability kinds only

  static Atom ProbGt(ExitId exit, std::size_t cls, double bound);
  static Atom ProbLt(ExitId exit, std::size_t cls, double bound);
  static Atom NotArgmax(std::size_t winner);
  static Atom ArgmaxLosesTo(std::size_t winner, std::size_t runner_up);

  bool operator==(const Atom&) const = default;
};

// All atoms must hold at the same point.
struct Conjunction {
  std::vector<Atom> atoms;

  bool operator==(const Conjunction&) const = default;
};

const char* to_string(AtomKind kind);
std::string describe(const Atom& atom);
// JSON array of {"kind", "exit", "class", "winner", "bound"} objects.
std::string to_json(const Conjunction& conj);

// Throws ValidationError if an atom refers to a missing exit or class.
void validate(const EENetwork& net, const Conjunction& conj);

bool eval_atom_exact(const Atom& atom, const std::vector<Vector>& exit_logits);
bool eval_atoms_exact(const EENetwork& net, const Vector& x, const Conjunction& conj);

enum class AtomStatus { kAlways, kNever, kMaybe };

// Probability atoms decided by intervals must clear their bound by this
// much (plus the propagated logit rounding) so that rounding inside the
// SoftMax bound can never produce a false proof. Logit comparisons use the
// propagated rounding bounds alone, so exact ties are decided exactly.
inline constexpr double kDecisionSlack = 1e-10;

AtomStatus atom_status(const Atom& atom, const LayerBounds& bounds);

}  // namespace eev
