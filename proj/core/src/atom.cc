#include "eev/atom.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "eev/error.h"
#include "json_util.h"

namespace eev {

Atom Atom::ProbGt(ExitId exit, std::size_t cls, double bound) {
  return {AtomKind::kProbGt, exit, cls, 0, bound};
}

Atom Atom::ProbLt(ExitId exit, std::size_t cls, double bound) {
  return {AtomKind::kProbLt, exit, cls, 0, bound};
}

Atom Atom::NotArgmax(std::size_t winner) {
  return {AtomKind::kNotArgmax, ExitId::Last(), 0, winner, 0.0};
}

Atom Atom::ArgmaxLosesTo(std::size_t winner, std::size_t runner_up) {
  return {AtomKind::kArgmaxLosesTo, ExitId::Last(), runner_up, winner, 0.0};
}

const char* to_string(AtomKind kind) {
  switch (kind) {
    case AtomKind::kProbGt: return "PROB_GT";
    case AtomKind::kProbLt: return "PROB_LT";
    case AtomKind::kNotArgmax: return "NOT_ARGMAX";
    case AtomKind::kArgmaxLosesTo: return "ARGMAX_LOSES_TO";
  }
  return "?";
}

std::string describe(const Atom& atom) {
  std::ostringstream os;
  os << to_string(atom.kind) << '(' << atom.exit.label();
  switch (atom.kind) {
    case AtomKind::kProbGt:
    case AtomKind::kProbLt: os << ", " << atom.cls << ", " << atom.bound; break;
    case AtomKind::kNotArgmax: os << ", " << atom.winner; break;
    case AtomKind::kArgmaxLosesTo: os << ", " << atom.winner << ", " << atom.cls; break;
  }
  os << ')';
  return os.str();
}

std::string to_json(const Conjunction& conj) { return internal::ToJson(conj).dump(); }

void validate(const EENetwork& net, const Conjunction& conj) {
  if (conj.atoms.empty()) throw ValidationError("conjunction", "must be non-empty");
  for (std::size_t k = 0; k < conj.atoms.size(); ++k) {
    const Atom& a = conj.atoms[k];
    const std::string path = "atoms[" + std::to_string(k) + "]";
    if (!net.valid(a.exit)) throw ValidationError(path + ".exit", "invalid exit");
    switch (a.kind) {
      case AtomKind::kProbGt:
      case AtomKind::kProbLt:
        if (a.cls >= net.num_classes()) throw ValidationError(path + ".class", "out of range");
        if (!std::isfinite(a.bound)) throw ValidationError(path + ".bound", "must be finite");
        break;
      case AtomKind::kArgmaxLosesTo:
        if (a.cls >= net.num_classes() || a.cls == a.winner) {
          throw ValidationError(path + ".class", "runner-up must be a different valid class");
        }
        [[fallthrough]];
      case AtomKind::kNotArgmax:
        if (!a.exit.is_last()) throw ValidationError(path + ".exit", "argmax atoms live at LAST");
        if (a.winner >= net.num_classes()) throw ValidationError(path + ".winner", "out of range");
        break;
    }
  }
}

bool eval_atom_exact(const Atom& atom, const std::vector<Vector>& exit_logits) {
  const Vector& logits =
      atom.exit.is_last() ? exit_logits.back() : exit_logits[atom.exit.ordinal()];
  const auto w = static_cast<Eigen::Index>(atom.winner);
  const auto c = static_cast<Eigen::Index>(atom.cls);
  switch (atom.kind) {
    case AtomKind::kProbGt: return softmax(logits)[c] > atom.bound;
    case AtomKind::kProbLt: return softmax(logits)[c] < atom.bound;
    case AtomKind::kNotArgmax:
      for (Eigen::Index i = 0; i < logits.size(); ++i) {
        if (i != w && logits[i] >= logits[w]) return true;
      }
      return false;
    case AtomKind::kArgmaxLosesTo: return logits[c] > logits[w];
  }
  return false;
}

bool eval_atoms_exact(const EENetwork& net, const Vector& x, const Conjunction& conj) {
  const std::vector<Vector> logits = all_exit_logits(net, x);
  for (const auto& atom : conj.atoms) {
    if (!eval_atom_exact(atom, logits)) return false;
  }
  return true;
}

namespace {

// a - ea > b + eb (or >= when `strict` is false) for the exact-arithmetic
// values. a - b is computed with the correct sign, so exact endpoints need
// no slack at all.
bool Exceeds(double a, double ea, double b, double eb, bool strict) {
  const double gap = a - b;
  const double err = ea + eb;
  if (err == 0.0) return strict ? gap > 0.0 : gap >= 0.0;
  return gap > err * (1.0 + 1e-12);
}

}  // namespace

AtomStatus atom_status(const Atom& atom, const LayerBounds& bounds) {
  const IntervalVector& logits = bounds.logits(atom.exit);
  switch (atom.kind) {
    case AtomKind::kProbGt:
    case AtomKind::kProbLt: {
      // SoftMax moves by at most half the largest logit perturbation.
      const double slack = kDecisionSlack + 0.5 * logits.max_err();
      const Interval p = softmax_prob_bounds(logits, atom.cls);
      if (atom.kind == AtomKind::kProbGt) {
        if (p.lo > atom.bound + slack) return AtomStatus::kAlways;
        if (p.hi <= atom.bound - slack) return AtomStatus::kNever;
      } else {
        if (p.hi < atom.bound - slack) return AtomStatus::kAlways;
        if (p.lo >= atom.bound + slack) return AtomStatus::kNever;
      }
      return AtomStatus::kMaybe;
    }
    case AtomKind::kNotArgmax: {
      const auto w = static_cast<Eigen::Index>(atom.winner);
      bool never = true;
      for (Eigen::Index i = 0; i < logits.size(); ++i) {
        if (i == w) continue;
        // One runner-up dominating everywhere settles the disjunction.
        if (Exceeds(logits.lo[i], logits.lo_err(i), logits.hi[w], logits.hi_err(w), false)) {
          return AtomStatus::kAlways;
        }
        never = never && Exceeds(logits.lo[w], logits.lo_err(w), logits.hi[i], logits.hi_err(i), true);
      }
      return never ? AtomStatus::kNever : AtomStatus::kMaybe;
    }
    case AtomKind::kArgmaxLosesTo: {
      const auto w = static_cast<Eigen::Index>(atom.winner);
      const auto i = static_cast<Eigen::Index>(atom.cls);
      if (Exceeds(logits.lo[i], logits.lo_err(i), logits.hi[w], logits.hi_err(w), true)) {
        return AtomStatus::kAlways;
      }
      if (Exceeds(logits.lo[w], logits.lo_err(w), logits.hi[i], logits.hi_err(i), false)) {
        return AtomStatus::kNever;
      }
      return AtomStatus::kMaybe;
    }
  }
  return AtomStatus::kMaybe;
}

}  // namespace eev
