#include "eev/verify.h"

#include <chrono>

#include "eev/error.h"
#include "json_util.h"

namespace eev {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class Recorder {
 public:
  Recorder(const QuerySpec& q, Algorithm alg) : start_(Clock::now()) {
    record_.algorithm = alg;
    record_.winner = q.winner;
    record_.inference_exit = q.inference_exit;
    for (ExitId id : q.net->exit_ids()) record_.per_exit.push_back({id, 0, 0, 0.0});
  }

  RunRecord& record() { return record_; }

  RunRecord Finish(VerdictStatus status) {
    record_.verdict.status = status;
    record_.wall_seconds = SecondsSince(start_);
    return std::move(record_);
  }

 private:
  Clock::time_point start_;
  RunRecord record_;
};

SolveResult Issue(const QuerySpec& q, CallKind kind, ExitId exit,
                  std::optional<std::size_t> runner_up, Conjunction conj,
                  const SolverConfig& cfg, RunRecord& record) {
  SolveResult r = solve(*q.net, q.box(), conj, cfg);
  ++record.solver_calls;
  record.subproblems_total += r.stats.subproblems;
  if (r.status == SolveStatus::kUnknown) ++record.unknown_subqueries;
  if (r.stats.timed_out) record.timed_out = true;
  for (auto& slot : record.per_exit) {
    if (slot.exit == exit) {
      ++slot.calls;
      slot.subproblems += r.stats.subproblems;
      slot.seconds += r.stats.wall_seconds;
    }
  }
  record.calls.push_back(
      {kind, exit, runner_up, r.status, r.stats.subproblems, r.stats.wall_seconds, std::move(conj)});
  return r;
}

bool PastDeadline(const SolverConfig& cfg) {
  return cfg.deadline && Clock::now() >= *cfg.deadline;
}

void CheckCounterexample(const QuerySpec& q, const Vector& cex, bool gated) {
  if (!q.box().contains(cex)) throw InternalError("counterexample lies outside the ball");
  const std::size_t predicted =
      gated ? infer(*q.net, cex).predicted_class
            : argmax(forward_logits(*q.net, cex, ExitId::Last()));
  if (predicted == q.winner) {
    throw InternalError("counterexample is classified as the winner under exact inference");
  }
}

RunRecord Unsafe(Recorder& rec, const QuerySpec& q, ExitId k, ExitSearch found, bool gated) {
  CheckCounterexample(q, *found.counterexample, gated);
  RunRecord& r = rec.record();
  r.verification_exit = k;
  r.verdict.counterexample = std::move(found.counterexample);
  r.verdict.cex_exit = k;
  r.verdict.cex_class = found.runner_up;
  return rec.Finish(VerdictStatus::kUnsafe);
}

// Shared driver for the four early-exit algorithms; the flags select the
// break probe and the continue probe.
RunRecord Drive(const QuerySpec& q, const SolverConfig& cfg, Algorithm alg, bool use_break,
                bool use_continue) {
  Recorder rec(q, alg);
  RunRecord& record = rec.record();
  bool unresolved = false;
  for (ExitId k : q.net->exit_ids()) {
    record.verification_exit = k;
    if (PastDeadline(cfg)) {
      record.timed_out = true;
      return rec.Finish(VerdictStatus::kUnknown);
    }
    if (use_break) {
      const SolveResult r = Issue(q, CallKind::kBreak, k, std::nullopt, break_query(q, k), cfg, record);
      if (r.stats.timed_out) return rec.Finish(VerdictStatus::kUnknown);
      if (r.status == SolveStatus::kUnsat) {
        return rec.Finish(unresolved ? VerdictStatus::kUnknown : VerdictStatus::kSafe);
      }
    }
    if (use_continue && !k.is_last()) {
      const SolveResult r =
          Issue(q, CallKind::kContinue, k, std::nullopt, continue_check(q, k), cfg, record);
      if (r.stats.timed_out) return rec.Finish(VerdictStatus::kUnknown);
      if (r.status == SolveStatus::kUnsat) continue;
    }
    ExitSearch found = exists_prev_cex(q, k, cfg, &record);
    if (found.status == VerdictStatus::kUnsafe) return Unsafe(rec, q, k, std::move(found), true);
    if (record.timed_out) return rec.Finish(VerdictStatus::kUnknown);
    if (found.status == VerdictStatus::kUnknown) unresolved = true;
  }
  return rec.Finish(unresolved ? VerdictStatus::kUnknown : VerdictStatus::kSafe);
}

}  // namespace

const char* to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::kSafe: return "SAFE";
    case VerdictStatus::kUnsafe: return "UNSAFE";
    case VerdictStatus::kUnknown: return "UNKNOWN";
  }
  return "?";
}

const char* to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::kBaseline: return "baseline";
    case Algorithm::kBreak: return "break";
    case Algorithm::kContinue: return "continue";
    case Algorithm::kCombined: return "combined";
    case Algorithm::kVanilla: return "vanilla";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (Algorithm a : {Algorithm::kBaseline, Algorithm::kBreak, Algorithm::kContinue,
                      Algorithm::kCombined, Algorithm::kVanilla}) {
    if (name == to_string(a)) return a;
  }
  throw ValidationError("alg", "unknown algorithm '" + name + "'");
}

const char* to_string(CallKind kind) {
  switch (kind) {
    case CallKind::kRunnerUp: return "runner_up";
    case CallKind::kBreak: return "break";
    case CallKind::kContinue: return "continue";
    case CallKind::kVanilla: return "vanilla";
  }
  return "?";
}

std::size_t RunRecord::calls_of(CallKind kind) const {
  std::size_t n = 0;
  for (const auto& c : calls) n += c.kind == kind ? 1 : 0;
  return n;
}

ExitSearch exists_prev_cex(const QuerySpec& q, ExitId k, const SolverConfig& cfg,
                           RunRecord* record) {
  RunRecord scratch;
  RunRecord& rec = record ? *record : scratch;
  if (!record) {
    for (ExitId id : q.net->exit_ids()) rec.per_exit.push_back({id, 0, 0, 0.0});
  }
  ExitSearch out;
  for (std::size_t i = 0; i < q.net->num_classes(); ++i) {
    if (i == q.winner) continue;
    SolveResult r = Issue(q, CallKind::kRunnerUp, k, i, runner_up_query(q, k, i), cfg, rec);
    if (r.status == SolveStatus::kSat) {
      out.status = VerdictStatus::kUnsafe;
      out.counterexample = std::move(r.witness);
      out.runner_up = i;
      return out;
    }
    if (r.status == SolveStatus::kUnknown) {
      out.status = VerdictStatus::kUnknown;
      if (r.stats.timed_out) return out;
    }
  }
  return out;
}

RunRecord verify_baseline(const QuerySpec& q, const SolverConfig& cfg) {
  return Drive(q, cfg, Algorithm::kBaseline, false, false);
}

RunRecord verify_break(const QuerySpec& q, const SolverConfig& cfg) {
  return Drive(q, cfg, Algorithm::kBreak, true, false);
}

RunRecord verify_continue(const QuerySpec& q, const SolverConfig& cfg) {
  return Drive(q, cfg, Algorithm::kContinue, false, true);
}

RunRecord verify_combined(const QuerySpec& q, const SolverConfig& cfg) {
  return Drive(q, cfg, Algorithm::kCombined, true, true);
}

RunRecord verify_vanilla(const QuerySpec& q, const SolverConfig& cfg) {
  // Gating is ignored entirely, so the reference label is the last layer's.
  QuerySpec plain = q;
  plain.winner = argmax(forward_logits(*q.net, q.center, ExitId::Last()));
  plain.inference_exit = ExitId::Last();
  Recorder rec(plain, Algorithm::kVanilla);
  RunRecord& record = rec.record();
  record.verification_exit = ExitId::Last();
  bool unresolved = false;
  for (std::size_t i = 0; i < q.net->num_classes(); ++i) {
    if (i == plain.winner) continue;
    SolveResult r =
        Issue(plain, CallKind::kVanilla, ExitId::Last(), i, vanilla_query(plain, i), cfg, record);
    if (r.status == SolveStatus::kSat) {
      return Unsafe(rec, plain, ExitId::Last(), {VerdictStatus::kUnsafe, std::move(r.witness), i},
                    false);
    }
    if (r.stats.timed_out) return rec.Finish(VerdictStatus::kUnknown);
    if (r.status == SolveStatus::kUnknown) unresolved = true;
  }
  return rec.Finish(unresolved ? VerdictStatus::kUnknown : VerdictStatus::kSafe);
}

RunRecord verify(Algorithm alg, const QuerySpec& q, const SolverConfig& cfg) {
  switch (alg) {
    case Algorithm::kBaseline: return verify_baseline(q, cfg);
    case Algorithm::kBreak: return verify_break(q, cfg);
    case Algorithm::kContinue: return verify_continue(q, cfg);
    case Algorithm::kCombined: return verify_combined(q, cfg);
    case Algorithm::kVanilla: return verify_vanilla(q, cfg);
  }
  throw ValidationError("alg", "unknown algorithm");
}

std::string to_json(const RunRecord& record, bool include_calls) {
  using nlohmann::json;
  json j;
  j["verdict"] = to_string(record.verdict.status);
  j["algorithm"] = to_string(record.algorithm);
  j["wall_time_s"] = record.wall_seconds;
  j["solver_calls"] = record.solver_calls;
  j["subproblems_total"] = record.subproblems_total;
  j["verification_exit"] = record.verification_exit.label();
  j["inference_exit"] = record.inference_exit.label();
  j["winner"] = record.winner;
  j["unknown_subqueries"] = record.unknown_subqueries;
  j["timed_out"] = record.timed_out;
  json kinds;
  for (CallKind k : {CallKind::kRunnerUp, CallKind::kBreak, CallKind::kContinue, CallKind::kVanilla}) {
    kinds[to_string(k)] = record.calls_of(k);
  }
  j["calls_by_kind"] = kinds;
  json per_exit = json::array();
  for (const auto& e : record.per_exit) {
    per_exit.push_back(
        {{"exit", e.exit.label()}, {"calls", e.calls}, {"subproblems", e.subproblems}, {"time_s", e.seconds}});
  }
  j["per_exit"] = per_exit;
  const Verdict& v = record.verdict;
  j["counterexample"] = v.counterexample ? internal::ToJson(*v.counterexample) : json(nullptr);
  j["cex_exit"] = v.cex_exit ? json(v.cex_exit->label()) : json(nullptr);
  j["cex_class"] = v.cex_class ? json(*v.cex_class) : json(nullptr);
  if (include_calls) {
    json calls = json::array();
    for (const auto& c : record.calls) {
      json cj;
      cj["kind"] = to_string(c.kind);
      cj["exit"] = c.exit.label();
      cj["runner_up"] = c.runner_up ? json(*c.runner_up) : json(nullptr);
      cj["status"] = to_string(c.status);
      cj["subproblems"] = c.subproblems;
      cj["time_s"] = c.seconds;
      cj["atoms"] = internal::ToJson(c.conj);
      calls.push_back(std::move(cj));
    }
    j["calls"] = calls;
  }
  return j.dump();
}

}  // namespace eev
