#include "eev/report.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "eev/error.h"
#include "json.hpp"

namespace eev {
namespace {

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

std::optional<double> ParseReal(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string Fixed(double v, int decimals) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  return ec == std::errc() ? std::string(buf, end) : std::string();
}

std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

Heatmap EmptyHeatmap(const EENetwork& net) {
  Heatmap h;
  h.exits = net.exit_ids();
  h.counts.assign(h.exits.size(), std::vector<std::size_t>(h.exits.size(), 0));
  return h;
}

std::size_t IndexOf(const Heatmap& h, ExitId id) {
  for (std::size_t i = 0; i < h.exits.size(); ++i) {
    if (h.exits[i] == id) return i;
  }
  throw InternalError("exit missing from heatmap axis");
}

}  // namespace

std::vector<InputRow> parse_inputs_csv(const std::string& text, std::size_t input_dim) {
  std::vector<InputRow> rows;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> fields = SplitFields(line);
    if (first) {
      first = false;
      if (!fields.empty() && !ParseReal(fields[0])) continue;  // header
    }
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != input_dim && fields.size() != input_dim + 1) {
      throw ValidationError(where, "expected " + std::to_string(input_dim) + " values (plus an optional label), got " +
                                       std::to_string(fields.size()));
    }
    InputRow row;
    row.x.resize(static_cast<Eigen::Index>(input_dim));
    for (std::size_t d = 0; d < input_dim; ++d) {
      const auto v = ParseReal(fields[d]);
      if (!v || !std::isfinite(*v)) throw ValidationError(where, "malformed value '" + fields[d] + "'");
      row.x[static_cast<Eigen::Index>(d)] = *v;
    }
    if (fields.size() == input_dim + 1) {
      const auto v = ParseReal(fields.back());
      if (!v || *v < 0 || std::floor(*v) != *v) {
        throw ValidationError(where, "label must be a non-negative integer");
      }
      row.label = static_cast<std::size_t>(*v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<InputRow> read_inputs_csv(const std::filesystem::path& path, std::size_t input_dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), "cannot open inputs file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_inputs_csv(ss.str(), input_dim);
}

unsigned pool_width(unsigned fallback) {
  if (const char* env = std::getenv("EEVERIFY_THREADS")) {
    const auto v = ParseReal(env);
    if (v && *v >= 1) return static_cast<unsigned>(*v);
  }
  return std::max(1u, fallback);
}

std::vector<BatchEntry> run_batch(const EENetwork& net, const std::vector<InputRow>& inputs,
                                  const std::vector<double>& eps_list, const BatchOptions& opts) {
  std::vector<BatchEntry> entries;
  for (double eps : eps_list) {
    for (std::size_t i = 0; i < inputs.size(); ++i) entries.push_back({i, eps, {}});
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= entries.size()) return;
      BatchEntry& entry = entries[slot];
      try {
        SolverConfig cfg = opts.solver;
        if (opts.timeout_seconds) {
          cfg.deadline = std::chrono::steady_clock::now() +
                         std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(*opts.timeout_seconds));
        }
        const QuerySpec q = make_query(net, inputs[entry.input_index].x, entry.eps, opts.clip);
        entry.record = verify(opts.algorithm, q, cfg);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = entries.size();
      }
    }
  };
  const unsigned width = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(entries.size())));
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return entries;
}

TimeStats time_stats(std::vector<double> seconds) {
  TimeStats s;
  s.count = seconds.size();
  if (seconds.empty()) return s;
  const double n = static_cast<double>(seconds.size());
  s.mean = std::accumulate(seconds.begin(), seconds.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : seconds) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  std::sort(seconds.begin(), seconds.end());
  const std::size_t mid = seconds.size() / 2;
  s.median = seconds.size() % 2 ? seconds[mid] : 0.5 * (seconds[mid - 1] + seconds[mid]);
  return s;
}

std::optional<double> robustness(std::size_t safe, std::size_t unsafe) {
  if (safe + unsafe == 0) return std::nullopt;
  return static_cast<double>(safe) / static_cast<double>(safe + unsafe);
}

std::size_t Heatmap::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

std::size_t Heatmap::diagonal() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

BatchReport aggregate(const EENetwork& net, std::vector<BatchEntry> entries) {
  BatchReport report;
  report.heatmap_safe = EmptyHeatmap(net);
  report.heatmap_unsafe = EmptyHeatmap(net);
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> times;
  std::map<double, EpsSummary> by_eps;
  for (const BatchEntry& e : entries) {
    EpsSummary& s = by_eps[e.eps];
    s.eps = e.eps;
    auto& [safe_t, unsafe_t] = times[e.eps];
    const RunRecord& r = e.record;
    switch (r.verdict.status) {
      case VerdictStatus::kSafe: {
        ++s.safe;
        safe_t.push_back(r.wall_seconds);
        Heatmap& h = report.heatmap_safe;
        ++h.counts[IndexOf(h, r.inference_exit)][IndexOf(h, r.verification_exit)];
        break;
      }
      case VerdictStatus::kUnsafe: {
        ++s.unsafe;
        unsafe_t.push_back(r.wall_seconds);
        Heatmap& h = report.heatmap_unsafe;
        ++h.counts[IndexOf(h, r.inference_exit)][IndexOf(h, r.verification_exit)];
        break;
      }
      case VerdictStatus::kUnknown: ++s.unknown; break;
    }
  }
  for (auto& [eps, s] : by_eps) {
    s.safe_time = time_stats(times[eps].first);
    s.unsafe_time = time_stats(times[eps].second);
    s.robustness = robustness(s.safe, s.unsafe);
    report.summary.push_back(s);
  }
  report.entries = std::move(entries);
  return report;
}

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  return ec == std::errc() ? std::string(buf, end) : std::string();
}

std::string format_seconds(double v) { return Fixed(v, 3); }

std::string summary_csv(const BatchReport& report) {
  std::ostringstream os;
  os << "eps,safe,unsafe,unknown,mean_s_safe,std_s_safe,median_s_safe,"
        "mean_s_unsafe,std_s_unsafe,median_s_unsafe,robustness\n";
  auto times = [](const TimeStats& t) {
    if (t.count == 0) return std::string(",,");
    return format_seconds(t.mean) + "," + format_seconds(t.std) + "," + format_seconds(t.median);
  };
  for (const EpsSummary& s : report.summary) {
    os << format_real(s.eps) << ',' << s.safe << ',' << s.unsafe << ',' << s.unknown << ','
       << times(s.safe_time) << ',' << times(s.unsafe_time) << ','
       << (s.robustness ? format_real(*s.robustness) : std::string()) << '\n';
  }
  return os.str();
}

std::string heatmap_csv(const Heatmap& heatmap) {
  std::ostringstream os;
  os << "inference_exit";
  for (ExitId id : heatmap.exits) os << ',' << id.label();
  os << '\n';
  for (std::size_t r = 0; r < heatmap.exits.size(); ++r) {
    os << heatmap.exits[r].label();
    for (std::size_t c = 0; c < heatmap.exits.size(); ++c) os << ',' << heatmap.counts[r][c];
    os << '\n';
  }
  return os.str();
}

std::string records_jsonl(const BatchReport& report) {
  std::ostringstream os;
  for (const BatchEntry& e : report.entries) {
    nlohmann::json j = nlohmann::json::parse(to_json(e.record));
    j["input_index"] = e.input_index;
    j["eps"] = e.eps;
    os << j.dump() << '\n';
  }
  return os.str();
}

std::vector<SweepRow> sweep_threshold(const EENetwork& net, const std::vector<InputRow>& inputs,
                                      double eps, std::vector<double> thresholds,
                                      const BatchOptions& opts) {
  for (double t : thresholds) {
    if (!(t > 0.5) || t > 1.0) {
      throw ValidationError("thresholds", "every threshold must lie in (0.5, 1], got " + format_real(t));
    }
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  if (thresholds.empty() || thresholds.back() != 1.0) thresholds.push_back(1.0);

  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    const EENetwork gated = net.with_uniform_threshold(t);
    SweepRow row;
    row.threshold = t;
    row.vanilla_proxy = t == 1.0;
    std::size_t correct = 0;
    std::size_t labelled = 0;
    double layers = 0.0;
    for (const InputRow& in : inputs) {
      const InferenceResult r = infer(gated, in.x);
      layers += static_cast<double>(gated.layer_of(r.exit_index) + 1);
      if (in.label) {
        ++labelled;
        correct += r.predicted_class == *in.label ? 1 : 0;
      }
    }
    if (!inputs.empty()) row.mean_inference_layers = layers / static_cast<double>(inputs.size());
    if (labelled > 0) row.accuracy = static_cast<double>(correct) / static_cast<double>(labelled);

    BatchOptions run = opts;
    if (row.vanilla_proxy) run.algorithm = Algorithm::kVanilla;
    const std::vector<BatchEntry> entries = run_batch(gated, inputs, {eps}, run);
    double seconds = 0.0;
    double subproblems = 0.0;
    for (const BatchEntry& e : entries) {
      seconds += e.record.wall_seconds;
      subproblems += static_cast<double>(e.record.subproblems_total);
      switch (e.record.verdict.status) {
        case VerdictStatus::kSafe: ++row.safe; break;
        case VerdictStatus::kUnsafe: ++row.unsafe; break;
        case VerdictStatus::kUnknown: ++row.unknown; break;
      }
    }
    if (!entries.empty()) {
      row.mean_verify_seconds = seconds / static_cast<double>(entries.size());
      row.mean_subproblems = subproblems / static_cast<double>(entries.size());
    }
    row.robustness = robustness(row.safe, row.unsafe);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "threshold,vanilla_proxy,accuracy,mean_inference_layers,robustness,mean_verify_s,"
        "mean_subproblems,safe,unsafe,unknown\n";
  for (const SweepRow& r : rows) {
    os << format_real(r.threshold) << ',' << (r.vanilla_proxy ? 1 : 0) << ','
       << (r.accuracy ? format_real(*r.accuracy) : std::string()) << ','
       << format_real(r.mean_inference_layers) << ','
       << (r.robustness ? format_real(*r.robustness) : std::string()) << ','
       << format_seconds(r.mean_verify_seconds) << ',' << format_real(r.mean_subproblems) << ','
       << r.safe << ',' << r.unsafe << ',' << r.unknown << '\n';
  }
  return os.str();
}

std::vector<CompareRow> compare_algorithms(const EENetwork& net, const std::vector<InputRow>& inputs,
                                           const std::vector<double>& eps_list,
                                           const std::vector<Algorithm>& algs, BatchOptions opts) {
  std::vector<CompareRow> rows;
  for (std::size_t a = 0; a < algs.size(); ++a) {
    opts.algorithm = algs[a];
    std::vector<BatchEntry> entries = run_batch(net, inputs, eps_list, opts);
    if (a == 0) {
      for (const BatchEntry& e : entries) rows.push_back({e.input_index, e.eps, {}, false});
    }
    for (std::size_t r = 0; r < entries.size(); ++r) rows[r].records.push_back(std::move(entries[r].record));
  }
  for (CompareRow& row : rows) {
    bool safe = false;
    bool unsafe = false;
    for (const RunRecord& rec : row.records) {
      safe = safe || rec.verdict.status == VerdictStatus::kSafe;
      unsafe = unsafe || rec.verdict.status == VerdictStatus::kUnsafe;
    }
    row.mismatch = safe && unsafe;
  }
  return rows;
}

std::string compare_csv(const std::vector<Algorithm>& algs, const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "input_index,eps";
  for (Algorithm a : algs) {
    const std::string n = to_string(a);
    os << ',' << n << "_verdict," << n << "_time_s," << n << "_solver_calls," << n << "_subproblems";
  }
  os << ",verdict_mismatch\n";
  for (const CompareRow& row : rows) {
    os << row.input_index << ',' << format_real(row.eps);
    for (const RunRecord& r : row.records) {
      os << ',' << to_string(r.verdict.status) << ',' << format_seconds(r.wall_seconds) << ','
         << r.solver_calls << ',' << r.subproblems_total;
    }
    os << ',' << (row.mismatch ? "mismatch" : "") << '\n';
  }
  return os.str();
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("spearman", "need two equal-length series");
  const std::vector<double> ra = Ranks(a);
  const std::vector<double> rb = Ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

}  // namespace eev
