#pragma once

// Command-line front end. run_cli() is the whole program minus main(), so
// tests can drive it with in-memory streams.
//
// Exit codes: 0 clean, 1 violation or counterexample found (payload is on
// the output), 2 usage or input error, 3 the computation could not be
// completed (unfactorable input or an internal cross-check failure).

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wseq/arith.hpp"
#include "wseq/errors.hpp"
#include "wseq/families.hpp"
#include "wseq/grimm.hpp"
#include "wseq/wcore.hpp"
#include "wseq/windows.hpp"

namespace wseq::cli {

using json = nlohmann::ordered_json;

enum class Format { jsonl, csv };

/// Integers above 2^53 are written as decimal strings.
inline constexpr u64 kMaxExactDouble = u64{1} << 53;

inline json num(u64 v) { return v > kMaxExactDouble ? json(std::to_string(v)) : json(v); }
inline json num(const BigNat& v) { return v > kMaxExactDouble ? json(v.str()) : json(static_cast<u64>(v)); }

template <class T>
json num_list(const std::vector<T>& xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(num(x));
  return a;
}

template <class Int>
json optional_num(const std::optional<Int>& v) {
  return v ? num(*v) : json(nullptr);
}

// ---------------------------------------------------------------------------
// record encoders

template <class Int>
void put_report(json& j, const BasicWReport<Int>& r) {
  j["is_w"] = r.is_w;
  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    json e;
    e["index"] = v.index;
    e["coprime_to_rest"] = v.coprime_to_rest;
    if (v.witness) {
      e["witness"] = {{"prime", num(v.witness->prime)}, {"partner", v.witness->partner}};
    } else {
      e["witness"] = nullptr;
    }
    verdicts.push_back(std::move(e));
  }
  j["verdicts"] = std::move(verdicts);
  j["w_indices"] = r.w_indices;
}

template <class Int>
json report_json(const BasicWReport<Int>& r) {
  json j = json::object();
  put_report(j, r);
  return j;
}

template <class Int>
json family_json(const BasicFamilyResult<Int>& r) {
  json j;
  j["family_id"] = r.family_id;
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = num(v);
  j["parameters"] = std::move(params);
  j["is_w"] = r.is_w;
  j["w_indices"] = r.w_indices;
  j["counterexample"] = r.counterexample ? report_json(*r.counterexample) : json(nullptr);
  return j;
}

inline json scan_record_json(const ScanRecord& r) {
  json j;
  j["m"] = num(r.m);
  j["n"] = num(r.n);
  j["is_w"] = r.is_w;
  j["has_prime"] = r.has_prime;
  j["w_count"] = num(r.w_count);
  j["min_spf_of_w"] = optional_num(r.min_spf_of_w);
  j["elapsed_nanos"] = num(r.elapsed_nanos);
  return j;
}

inline json violation_json(const Violation& v) {
  json j;
  j["violation"] = to_string(v.kind);
  j["m"] = num(v.m);
  j["n"] = num(v.n);
  j["spf"] = v.kind == ViolationKind::small_spf_w_number ? num(v.spf) : json(nullptr);
  return j;
}

inline json grimm_json(const CompositeRun& run, const GrimmAssignment& a) {
  json j;
  j["m"] = num(run.m);
  j["n"] = num(run.n);
  json pairs = json::array();
  for (const auto& p : a.pairs) pairs.push_back({{"element", num(p.element)}, {"prime", num(p.prime)}});
  j["pairs"] = std::move(pairs);
  return j;
}

inline json grimm_finding_json(const GrimmFinding& f) {
  json j;
  j["finding"] = "grimm";
  j["m"] = num(f.run.m);
  j["n"] = num(f.run.n);
  j["deficiency"] = f.deficiency;
  j["elements"] = num_list(f.elements);
  j["primes"] = num_list(f.primes);
  return j;
}

// ---------------------------------------------------------------------------
// line emitter

/// Writes one record per line. CSV output flattens each object into a row;
/// nested values become JSON text in a quoted cell, and a header row is
/// written whenever the key set changes.
class Emitter {
public:
  Emitter(std::ostream& os, Format format, std::string header = {})
      : os_(os), format_(format), header_(std::move(header)) {}

  void emit(const json& record) {
    std::string line;
    if (format_ == Format::jsonl) {
      line = record.dump();
    } else {
      std::string header, row;
      for (auto it = record.begin(); it != record.end(); ++it) {
        if (it != record.begin()) {
          header += ',';
          row += ',';
        }
        header += it.key();
        row += cell(*it);
      }
      if (header != header_) {
        write(header);
        header_ = header;
      }
      line = std::move(row);
    }
    write(line);
  }

  /// Plain text line, identical in both formats.
  void text(const std::string& line) { write(line); }

  u64 bytes() const { return bytes_; }
  const std::string& header() const { return header_; }

private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  static std::string cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return quote(v.get<std::string>());
    if (v.is_structured()) return quote(v.dump());
    return v.dump();
  }

  void write(const std::string& line) {
    os_ << line << '\n';
    bytes_ += line.size() + 1;
  }

  std::ostream& os_;
  Format format_;
  std::string header_;
  u64 bytes_ = 0;
};

// ---------------------------------------------------------------------------
// argument helpers

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline u64 parse_u64(std::string_view s, std::string_view what) {
  u64 v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end)
    throw usage_error(std::string(what) + ": not a non-negative 64-bit integer: '" + std::string(s) + "'");
  return v;
}

/// "p/q" or a decimal such as "0.05".
inline Rational parse_rational(const std::string& s) {
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational r{parse_u64(std::string_view(s).substr(0, slash), "--eps"),
               parse_u64(std::string_view(s).substr(slash + 1), "--eps")};
    if (r.den == 0) throw usage_error("--eps: zero denominator");
    return r;
  }
  const auto dot = s.find('.');
  if (dot == std::string::npos) return {parse_u64(s, "--eps"), 1};
  const std::string frac = s.substr(dot + 1);
  if (frac.size() > 18) throw usage_error("--eps: too many decimal places");
  u64 den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const u64 whole = dot == 0 ? 0 : parse_u64(std::string_view(s).substr(0, dot), "--eps");
  const u64 part = frac.empty() ? 0 : parse_u64(frac, "--eps");
  Rational r{checked_add(checked_mul(whole, den), part), den};
  const u64 g = r.num == 0 ? den : gcd(r.num, r.den);
  return {r.num / g, r.den / g};
}

inline std::vector<u64> read_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open " + path);
  std::vector<u64> xs;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    std::istringstream words(line);
    std::string w;
    while (words >> w) xs.push_back(parse_u64(w, path));
  }
  return xs;
}

inline unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) {
    if (*flag == 0) throw usage_error("--threads must be positive");
    return *flag;
  }
  if (const char* env = std::getenv("WSEQ_THREADS"); env && *env) {
    const u64 t = parse_u64(env, "WSEQ_THREADS");
    if (t == 0 || t > 4096) throw usage_error("WSEQ_THREADS must be in 1..4096");
    return static_cast<unsigned>(t);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// 64-bit FNV-1a.
inline u64 fnv1a(std::string_view s) {
  u64 h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex(u64 v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// checkpointed scan

struct JobCheckpoint {
  std::string job_id;
  std::string params_hash;
  std::optional<u64> last_completed_chunk; // empty before the first chunk
  u64 total_chunks = 0;
  u64 records_written = 0;
  u64 output_bytes = 0;
  u64 violations = 0;
  std::string csv_header;

  json to_json() const {
    json j;
    j["job_id"] = job_id;
    j["params_hash"] = params_hash;
    j["last_completed_chunk"] = optional_num(last_completed_chunk);
    j["total_chunks"] = num(total_chunks);
    j["records_written"] = num(records_written);
    j["output_bytes"] = num(output_bytes);
    j["violations"] = num(violations);
    j["csv_header"] = csv_header;
    return j;
  }

  static JobCheckpoint from_json(const json& j) {
    auto field = [&](const char* key) -> u64 {
      const auto& v = j.at(key);
      return v.is_string() ? parse_u64(v.get<std::string>(), key) : v.get<u64>();
    };
    JobCheckpoint c;
    c.job_id = j.at("job_id").get<std::string>();
    c.params_hash = j.at("params_hash").get<std::string>();
    if (!j.at("last_completed_chunk").is_null()) c.last_completed_chunk = field("last_completed_chunk");
    c.total_chunks = field("total_chunks");
    c.records_written = field("records_written");
    c.output_bytes = field("output_bytes");
    c.violations = field("violations");
    c.csv_header = j.value("csv_header", "");
    return c;
  }
};

/// Replaces the checkpoint file in one step.
inline void write_checkpoint(const std::filesystem::path& path, const JobCheckpoint& c) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << c.to_json().dump() << '\n';
    os.flush();
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::optional<JobCheckpoint> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return std::nullopt;
  try {
    return JobCheckpoint::from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw usage_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

struct ScanJob {
  u64 m_from = 0;
  u64 m_to = 0;
  u64 n = 0;
  u64 chunk = 4096;
  bool timing = false;
  Format format = Format::jsonl;
  unsigned threads = 1;
  std::optional<u64> max_chunks;
  std::string out_path;
  std::string checkpoint_path;
  std::string job_id;

  std::string canonical() const {
    std::ostringstream os;
    os << "scan;m_from=" << m_from << ";m_to=" << m_to << ";n=" << n << ";chunk=" << chunk
       << ";timing=" << timing << ";format=" << (format == Format::csv ? "csv" : "jsonl");
    return os.str();
  }
};

inline int run_scan(const ScanJob& job, std::ostream& out, std::ostream& err) {
  if (job.m_from > job.m_to) throw usage_error("scan needs --m-from <= --m-to");
  if (job.n < 2) throw usage_error("scan needs --n >= 2");
  if (job.chunk == 0) throw usage_error("--chunk must be positive");
  if (!job.checkpoint_path.empty() && job.out_path.empty()) throw usage_error("--checkpoint requires --out");
  checked_add(job.m_to, job.n);

  const u64 total = chunk_count(job.m_from, job.m_to, job.chunk);
  JobCheckpoint state;
  state.params_hash = hex(fnv1a(job.canonical()));
  state.job_id = job.job_id.empty() ? "scan-" + state.params_hash : job.job_id;
  state.total_chunks = total;

  if (!job.checkpoint_path.empty()) {
    if (auto saved = read_checkpoint(job.checkpoint_path)) {
      if (saved->params_hash != state.params_hash) {
        err << "error: checkpoint " << job.checkpoint_path << " belongs to different scan parameters\n";
        return 2;
      }
      if (saved->output_bytes > 0 && !std::filesystem::exists(job.out_path))
        throw usage_error("output " + job.out_path + " is missing but the checkpoint expects data");
      state = *saved;
    }
  }

  std::ofstream file;
  std::ostream* sink = &out;
  u64 base_bytes = 0;
  if (!job.out_path.empty()) {
    if (state.last_completed_chunk || state.output_bytes > 0) {
      const auto size = std::filesystem::file_size(job.out_path);
      if (size < state.output_bytes) throw usage_error("output " + job.out_path + " is shorter than the checkpoint");
      std::filesystem::resize_file(job.out_path, state.output_bytes);
      file.open(job.out_path, std::ios::binary | std::ios::app);
      base_bytes = state.output_bytes;
    } else {
      file.open(job.out_path, std::ios::binary | std::ios::trunc);
    }
    if (!file) throw usage_error("cannot open " + job.out_path);
    sink = &file;
  }
  Emitter emit(*sink, job.format, state.csv_header);

  const u64 next = state.last_completed_chunk ? *state.last_completed_chunk + 1 : 0;
  u64 todo = total - next;
  const bool interrupted = job.max_chunks && *job.max_chunks < todo;
  if (interrupted) todo = *job.max_chunks;

  ordered_parallel<ScanChunk>(
      todo, job.threads,
      [&](u64 i) {
        auto [lo, hi] = chunk_bounds(job.m_from, job.m_to, job.chunk, next + i);
        return scan_chunk(lo, hi, job.n, job.timing);
      },
      [&](u64 i, ScanChunk part) {
        for (const auto& r : part.records) emit.emit(scan_record_json(r));
        for (const auto& v : part.violations) emit.emit(violation_json(v));
        sink->flush();
        if (!*sink) throw std::runtime_error("write failed");
        state.last_completed_chunk = next + i;
        state.records_written += part.records.size();
        state.violations += part.violations.size();
        state.output_bytes = base_bytes + emit.bytes();
        state.csv_header = emit.header();
        if (!job.checkpoint_path.empty()) write_checkpoint(job.checkpoint_path, state);
      });

  if (interrupted) {
    err << "stopped after chunk " << *state.last_completed_chunk << " of " << total
        << "; rerun with the same arguments to resume\n";
  } else {
    json s;
    s["summary"] = "scan";
    s["m_from"] = num(job.m_from);
    s["m_to"] = num(job.m_to);
    s["n"] = num(job.n);
    s["windows"] = num(state.records_written);
    s["violations"] = num(state.violations);
    emit.emit(s);
    sink->flush();
  }
  return state.violations > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// dispatcher

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"W-sequence checks, window scans and related number-theory sweeps", "wseq"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  std::string format_name = "jsonl";
  std::optional<unsigned> threads_flag;
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"jsonl", "csv"}));
  app.add_option("--threads", threads_flag, "Worker threads (default: WSEQ_THREADS, then all cores)");

  // check
  auto* check = app.add_subcommand("check", "Decide whether an explicit sequence is a W sequence");
  std::vector<std::string> values;
  std::string file, method = "factor";
  check->add_option("values", values, "Strictly increasing positive integers");
  check->add_option("--file", file, "Read the sequence from a file (whitespace or comma separated)");
  check->add_option("--method", method, "Decision method")->check(CLI::IsMember({"factor", "oracle"}));

  // window
  auto* window = app.add_subcommand("window", "W report for the window m+1..m+n");
  u64 wm = 0, wn = 0;
  window->add_option("--m", wm, "Offset")->required();
  window->add_option("--n", wn, "Length (>= 2)")->required();

  // scan
  auto* scan = app.add_subcommand("scan", "Scan windows for prime-without-W and small-factor violations");
  ScanJob job;
  scan->add_option("--m-from", job.m_from, "First offset")->default_val(0);
  scan->add_option("--m-to", job.m_to, "Last offset")->required();
  scan->add_option("--n", job.n, "Window length (>= 2)")->required();
  scan->add_option("--chunk", job.chunk, "Offsets per chunk")->default_val(4096);
  scan->add_option("--out", job.out_path, "Write records to this file");
  scan->add_option("--checkpoint", job.checkpoint_path, "Checkpoint file; resume when it exists");
  scan->add_option("--job-id", job.job_id, "Name recorded in the checkpoint");
  scan->add_option("--max-chunks", job.max_chunks, "Stop after this many chunks (resume later)");
  scan->add_flag("--timing", job.timing, "Record elapsed_nanos per window");

  // theorem2
  auto* th2 = app.add_subcommand("theorem2", "Prime in (m^2, (m+1)^2) versus W status of its integers");
  u64 th2_max = 2000;
  th2->add_option("--m-max", th2_max, "Largest m")->default_val(2000);

  // theorem3
  auto* th3 = app.add_subcommand("theorem3", "Prime in (m, m + m^(1/2+eps)] versus W status");
  std::string eps_text = "1/20";
  u64 th3_from = 1000, th3_to = 100000, th3_fail = 1000;
  th3->add_option("--eps", eps_text, "Exponent excess as p/q or decimal")->default_val("1/20");
  th3->add_option("--m-from", th3_from, "First m")->default_val(1000);
  th3->add_option("--m-to", th3_to, "Last m")->default_val(100000);
  th3->add_option("--fail-from", th3_fail, "Mismatches at m >= this set exit code 1")->default_val(1000);

  // hscan
  auto* hs = app.add_subcommand("hscan", "All non-W lengths at a fixed offset");
  u64 hm = 0, hn = 0;
  hs->add_option("--m", hm, "Offset")->required();
  hs->add_option("--n-max", hn, "Largest length")->required();

  // min-nonw
  auto* mn = app.add_subcommand("min-nonw", "Smallest offset whose window of length n is not W");
  u64 mn_n = 0, mn_max = 0;
  mn->add_option("--n", mn_n, "Window length (>= 2)")->required();
  mn->add_option("--m-max", mn_max, "Largest offset searched")->required();

  // families
  bool only_failures = false;
  auto* q1 = app.add_subcommand("q1", "Squares plus one: 1^2+1, ..., m^2+1");
  u64 q1_from = 4, q1_to = 2000;
  q1->add_option("--m-from", q1_from, "First m")->default_val(4);
  q1->add_option("--m-to", q1_to, "Last m")->default_val(2000);
  q1->add_flag("--only-failures", only_failures, "Emit non-W results only");

  auto* q2 = app.add_subcommand("q2", "Progressions a, a+b, ..., a+(b-1)b");
  std::optional<u64> q2_a, q2_b;
  u64 q2_bmax = 500;
  q2->add_option("--a", q2_a, "Single check: first term");
  q2->add_option("--b", q2_b, "Single check: difference");
  q2->add_option("--b-max", q2_bmax, "Sweep every valid (a, b) with 3 <= b <= b-max")->default_val(500);
  q2->add_flag("--only-failures", only_failures, "Emit non-W results only");

  auto* q3 = app.add_subcommand("q3", "Shifted odd primes 2+3, 2+5, ..., 2+p_m");
  u64 q3_from = 2, q3_to = 2000;
  q3->add_option("--m-from", q3_from, "First m")->default_val(2);
  q3->add_option("--m-to", q3_to, "Last m")->default_val(2000);
  q3->add_flag("--only-failures", only_failures, "Emit non-W results only");

  auto* fibc = app.add_subcommand("fib", "Fibonacci windows F_{m+1}..F_{m+n}");
  std::optional<u64> fib_m, fib_n, fib_sum;
  fibc->add_option("--m", fib_m, "Offset (>= 1)");
  fibc->add_option("--n", fib_n, "Length (>= 2)");
  fibc->add_option("--max-sum", fib_sum, "Sweep all windows with m + n <= max-sum");

  auto* gr = app.add_subcommand("grimm", "Distinct prime assignments for composite runs");
  u64 gr_limit = 1000000;
  bool gr_summary = false;
  gr->add_option("--limit", gr_limit, "Runs with every element <= limit")->default_val(1000000);
  gr->add_flag("--summary-only", gr_summary, "Emit findings and the summary only");

  auto* est = app.add_subcommand("estimate", "Monte Carlo coprimality densities");
  std::string est_kind;
  unsigned est_size = 2;
  u64 est_bound = 1000000000, est_trials = 1000000, est_seed = 0;
  est->add_option("--kind", est_kind, "pairwise: k pairwise coprime; exists: one of m coprime to the rest")
      ->required()
      ->check(CLI::IsMember({"pairwise", "exists"}));
  est->add_option("--size", est_size, "k or m (>= 2)")->default_val(2);
  est->add_option("--bound", est_bound, "Draw uniformly from 1..bound")->default_val(1000000000);
  est->add_option("--trials", est_trials, "Number of draws")->default_val(1000000);
  est->add_option("--seed", est_seed, "RNG seed")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    const Format format = format_name == "csv" ? Format::csv : Format::jsonl;
    Emitter emit(out, format);
    auto summary = [](const char* name) {
      json s;
      s["summary"] = name;
      return s;
    };

    if (check->parsed()) {
      std::vector<u64> xs;
      if (!file.empty()) xs = read_sequence_file(file);
      for (const auto& v : values) xs.push_back(parse_u64(v, "check"));
      if (xs.empty()) throw usage_error("check needs values or --file");
      const Sequence seq(xs);
      const WReport r = method == "oracle" ? w_report_oracle(seq) : w_report(seq);
      json j;
      j["elements"] = num_list(xs);
      put_report(j, r);
      std::vector<u64> w_numbers;
      for (auto i : r.w_indices) w_numbers.push_back(xs[i]);
      j["w_numbers"] = num_list(w_numbers);
      emit.emit(j);
      return r.is_w ? 0 : 1;
    }

    if (window->parsed()) {
      const Window w{wm, wn};
      w.validate();
      const WReport r = window_w_report(w);
      json j;
      j["m"] = num(wm);
      j["n"] = num(wn);
      put_report(j, r);
      emit.emit(j);
      return r.is_w ? 0 : 1;
    }

    if (scan->parsed()) {
      job.format = format;
      job.threads = resolve_threads(threads_flag);
      return run_scan(job, out, err);
    }

    if (th2->parsed()) {
      const auto res = theorem2_scan(th2_max);
      for (const auto& r : res.records) emit.emit({{"m", num(r.m)}, {"has_prime", r.has_prime}, {"is_w", r.is_w}});
      json s = summary("theorem2");
      s["m_max"] = num(th2_max);
      s["mismatches"] = num_list(res.mismatches);
      emit.emit(s);
      return res.mismatches.empty() ? 0 : 1;
    }

    if (th3->parsed()) {
      const Rational eps = parse_rational(eps_text);
      const auto res = theorem3_scan(eps, th3_from, th3_to);
      std::vector<u64> failing;
      for (u64 m : res.mismatches)
        if (m >= th3_fail) failing.push_back(m);
      for (const auto& r : res.records)
        emit.emit({{"m", num(r.m)}, {"n", num(r.n)}, {"has_prime", r.has_prime}, {"is_w", r.is_w}});
      json s = summary("theorem3");
      s["eps"] = std::to_string(eps.num) + "/" + std::to_string(eps.den);
      s["m_from"] = num(th3_from);
      s["m_to"] = num(th3_to);
      s["skipped"] = num(res.skipped);
      s["mismatches"] = num_list(res.mismatches);
      s["failing"] = num_list(failing);
      emit.emit(s);
      return failing.empty() ? 0 : 1;
    }

    if (hs->parsed()) {
      const auto r = h_scan(hm, hn);
      emit.emit({{"m", num(r.m)},
                 {"n_max", num(r.n_max)},
                 {"nonw_lengths", num_list(r.nonw_lengths)},
                 {"largest_nonw", optional_num(r.largest_nonw)}});
      return r.nonw_lengths.empty() ? 0 : 1;
    }

    if (mn->parsed()) {
      const auto m = min_nonw_start(mn_n, mn_max);
      if (!m) {
        emit.text("none");
        return 0;
      }
      emit.emit({{"n", num(mn_n)}, {"m", num(*m)}, {"first", num(*m + 1)}, {"last", num(*m + mn_n)}});
      return 1;
    }

    auto emit_families = [&](const char* name, const std::vector<FamilyResult>& results) {
      std::vector<json> failures;
      for (const auto& r : results) {
        if (!r.is_w) {
          json p = json::object();
          for (const auto& [k, v] : r.parameters) p[k] = num(v);
          failures.push_back(std::move(p));
        }
        if (!only_failures || !r.is_w) emit.emit(family_json(r));
      }
      json s = summary(name);
      s["checked"] = results.size();
      s["non_w"] = failures;
      emit.emit(s);
      return failures.empty() ? 0 : 1;
    };

    if (q1->parsed()) return emit_families("q1", squares_plus_one_sweep(q1_from, q1_to));
    if (q3->parsed()) return emit_families("q3", shifted_primes_sweep(q3_from, q3_to));

    if (q2->parsed()) {
      if (q2_a.has_value() != q2_b.has_value()) throw usage_error("q2 needs both --a and --b, or neither");
      std::vector<FamilyResult> results;
      if (q2_a) {
        results.push_back(ap_check(*q2_a, *q2_b));
      } else {
        for (u64 b = 3; b <= q2_bmax; ++b)
          for (u64 a = 1; a < b; ++a)
            if (gcd(a, b) == 1) results.push_back(ap_check(a, b));
      }
      return emit_families("q2", results);
    }

    if (fibc->parsed()) {
      if (fib_sum) {
        if (fib_m || fib_n) throw usage_error("fib takes either --m/--n or --max-sum");
        const auto sw = fibonacci_sweep(*fib_sum);
        auto pairs = [](const std::vector<std::pair<u64, u64>>& xs) {
          json a = json::array();
          for (auto [m, n] : xs) a.push_back({{"m", num(m)}, {"n", num(n)}});
          return a;
        };
        json s = summary("fib");
        s["max_sum"] = num(*fib_sum);
        s["windows"] = num(sw.windows);
        s["w_windows"] = num(sw.w_windows);
        s["windows_with_prime"] = num(sw.windows_with_prime);
        s["non_w"] = pairs(sw.non_w);
        s["inconsistent"] = pairs(sw.inconsistent);
        emit.emit(s);
        return sw.non_w.empty() && sw.inconsistent.empty() ? 0 : 1;
      }
      if (!fib_m || !fib_n) throw usage_error("fib needs --m and --n, or --max-sum");
      const auto r = fibonacci_window_check(*fib_m, *fib_n);
      json j = family_json(r.family);
      j["has_prime"] = r.has_prime;
      j["primality_probabilistic"] = r.primality_probabilistic;
      j["consistent"] = r.consistent;
      emit.emit(j);
      return r.family.is_w && r.consistent ? 0 : 1;
    }

    if (gr->parsed()) {
      const auto runs = composite_runs(gr_limit);
      u64 verified = 0;
      u64 findings = 0;
      CompositeRun longest;
      ordered_parallel<GrimmOutcome>(
          runs.size(), resolve_threads(threads_flag), [&](u64 i) { return grimm_check(runs[i]); },
          [&](u64, GrimmOutcome r) {
            if (r.run.n > longest.n) longest = r.run;
            if (r.assignment) {
              if (!verify_assignment(r.run, *r.assignment))
                throw consistency_error("invalid assignment for run starting at " + std::to_string(r.run.first()));
              ++verified;
              if (!gr_summary) emit.emit(grimm_json(r.run, *r.assignment));
            } else {
              ++findings;
              emit.emit(grimm_finding_json(*r.finding));
            }
          });
      json s = summary("grimm");
      s["limit"] = num(gr_limit);
      s["runs"] = runs.size();
      s["verified"] = num(verified);
      s["findings"] = num(findings);
      s["longest"] = {{"m", num(longest.m)}, {"n", num(longest.n)}};
      emit.emit(s);
      return findings == 0 ? 0 : 1;
    }

    if (est->parsed()) {
      EstimatorOptions opts;
      opts.threads = resolve_threads(threads_flag);
      const bool pairwise = est_kind == "pairwise";
      const Estimate e = pairwise ? estimate_pairwise_coprime_prob(est_size, est_bound, est_trials, est_seed, opts)
                                  : estimate_exists_coprime_prob(est_size, est_bound, est_trials, est_seed, opts);
      const double claimed = pairwise ? claimed_pairwise_density(est_size) : claimed_exists_density(est_size);
      json j;
      j["kind"] = est_kind;
      j["size"] = est_size;
      j["bound"] = num(est_bound);
      j["trials"] = num(e.trials);
      j["seed"] = num(est_seed);
      j["estimate"] = e.estimate;
      j["std_error"] = e.std_error;
      j["successes"] = num(e.successes);
      j["exhaustive"] = e.exhaustive;
      j["claimed"] = claimed;
      j["deviation"] = e.estimate - claimed;
      emit.emit(j);
      return 0;
    }
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const wseq::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const wseq::overflow_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const unresolved_error& e) {
    err << "unresolved: " << e.what() << '\n';
    return 3;
  } catch (const consistency_error& e) {
    err << "internal: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 2;
}

} // namespace wseq::cli
