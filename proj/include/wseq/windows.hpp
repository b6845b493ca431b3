#pragma once

// W checks for consecutive windows m+1, ..., m+n without factorizing the
// elements, plus the scanners built on top of them.
//
// Two window elements differ by less than n, so any prime they share is
// below n. The check therefore marks, for each prime p < n with at least two
// multiples in the window, every such multiple as blocked.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "wseq/arith.hpp"
#include "wseq/wcore.hpp"

namespace wseq {

/// The consecutive integers m+1, ..., m+n.
struct Window {
  u64 m = 0;
  u64 n = 2;

  u64 first() const { return m + 1; }
  u64 last() const { return m + n; }

  void validate() const {
    if (n < 2) throw domain_error("window length must be >= 2");
    checked_add(m, n);
  }

  std::vector<u64> materialize() const {
    validate();
    std::vector<u64> xs(n);
    for (u64 i = 0; i < n; ++i) xs[i] = m + 1 + i;
    return xs;
  }

  friend bool operator==(const Window&, const Window&) = default;
};

/// Reusable checker for windows of one fixed length. Holds the primes below
/// n and scratch space; not thread-safe, make one per worker.
class WindowChecker {
public:
  explicit WindowChecker(u64 n) : n_(n), primes_(n >= 3 ? primes_up_to(n - 1) : std::vector<u64>{}) {
    if (n < 2) throw domain_error("window length must be >= 2");
    witness_prime_.resize(n);
    partner_.resize(n);
  }

  u64 length() const noexcept { return n_; }

  /// Marks blocked elements of window (m, n). Afterwards witness_prime(i) is
  /// the smallest shared prime of element m+1+i, or 0 when it is a W number.
  void classify(u64 m) {
    checked_add(m, n_);
    std::fill(witness_prime_.begin(), witness_prime_.end(), 0);
    for (u64 p : primes_) {
      // zero-based index of the smallest multiple of p above m
      const u64 off = p - m % p - 1;
      if (off + p >= n_) continue; // fewer than two multiples
      for (u64 k = off; k < n_; k += p) {
        if (witness_prime_[k] != 0) continue;
        witness_prime_[k] = p;
        partner_[k] = (k == off) ? off + p : off;
      }
    }
  }

  bool is_w(u64 m) {
    classify(m);
    return std::find(witness_prime_.begin(), witness_prime_.end(), u64{0}) != witness_prime_.end();
  }

  u64 witness_prime(std::size_t i) const { return witness_prime_[i]; }
  std::size_t partner(std::size_t i) const { return static_cast<std::size_t>(partner_[i]); }

  WReport report(u64 m) {
    classify(m);
    WReport r;
    r.verdicts.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      r.verdicts[i].index = i;
      r.verdicts[i].coprime_to_rest = witness_prime_[i] == 0;
      if (witness_prime_[i] != 0) r.verdicts[i].witness = Witness<u64>{witness_prime_[i], partner(i)};
    }
    finalize_report(r);
    return r;
  }

private:
  u64 n_;
  std::vector<u64> primes_;
  std::vector<u64> witness_prime_;
  std::vector<u64> partner_;
};

/// W report of a window; identical to w_report on the materialized sequence.
inline WReport window_w_report(const Window& w) {
  w.validate();
  return WindowChecker(w.n).report(w.m);
}

inline bool window_is_w(const Window& w) {
  w.validate();
  return WindowChecker(w.n).is_w(w.m);
}

inline bool contains_prime(const Window& w) {
  w.validate();
  for (u64 x = w.first(); x <= w.last(); ++x)
    if (is_prime(x)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// smallest-prime-factor segment

/// Smallest prime factors of every integer in [lo, hi], from a segmented
/// sieve. spf(1) is reported as 1. Values with no sieving-prime factor are
/// resolved lazily (prime test, then factorization) only when asked for.
class SpfSegment {
public:
  static constexpr u64 kSievePrimeLimit = u64{1} << 20;

  SpfSegment(u64 lo, u64 hi) : lo_(lo), hi_(hi), spf_(hi - lo + 1, 0) {
    if (lo == 0 || hi < lo) throw domain_error("SpfSegment needs 1 <= lo <= hi");
    const u64 root = isqrt(hi);
    complete_ = root <= kSievePrimeLimit;
    for (u64 p : sieve_primes()) {
      if (p > root) break;
      const u128 up = (static_cast<u128>(lo) + p - 1) / p * p;
      if (up > hi) continue;
      const u64 start = std::max(p * p, static_cast<u64>(up));
      for (u64 x = start; x <= hi; x += p) {
        auto& s = spf_[x - lo];
        if (s == 0) s = p;
        if (hi - x < p) break;
      }
    }
    if (lo == 1) spf_[0] = 1;
  }

  u64 spf(u64 x) {
    auto& s = spf_[x - lo_];
    if (s == 0) s = (complete_ || is_prime(x)) ? x : smallest_prime_factor(x);
    return s;
  }

  bool is_prime_value(u64 x) {
    if (x < 2) return false;
    const u64 s = spf_[x - lo_];
    if (s != 0) return s == x;
    if (complete_) return true;
    return is_prime(x);
  }

private:
  static const std::vector<u64>& sieve_primes() {
    static const std::vector<u64> table = primes_up_to(kSievePrimeLimit);
    return table;
  }

  u64 lo_, hi_;
  std::vector<u64> spf_;
  bool complete_ = true;
};

// ---------------------------------------------------------------------------
// scan_windows: prime-implies-W and smallest-factor checks over a range of offsets

struct ScanRecord {
  u64 m = 0;
  u64 n = 0;
  bool is_w = false;
  bool has_prime = false;
  u64 w_count = 0;
  std::optional<u64> min_spf_of_w; // spf(1) counts as 1
  u64 elapsed_nanos = 0;

  friend bool operator==(const ScanRecord&, const ScanRecord&) = default;
};

enum class ViolationKind { prime_without_w, small_spf_w_number };

inline const char* to_string(ViolationKind k) {
  return k == ViolationKind::prime_without_w ? "prime_without_w" : "small_spf_w_number";
}

struct Violation {
  ViolationKind kind{};
  u64 m = 0;
  u64 n = 0;
  /// For small_spf_w_number: the offending smallest prime factor.
  u64 spf = 0;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ScanOptions {
  u64 chunk = 4096;
  unsigned threads = 1;
  bool measure_time = false;
};

struct ScanChunk {
  std::vector<ScanRecord> records;
  std::vector<Violation> violations;
};

/// Violations implied by a single record. A W window whose smallest W-number
/// factor p has 2p < n + 1 breaks the smallest-factor bound; windows with
/// m = 0 contain 1 and are outside that bound's hypothesis.
inline std::vector<Violation> violations_of(const ScanRecord& r) {
  std::vector<Violation> out;
  if (r.has_prime && !r.is_w) out.push_back({ViolationKind::prime_without_w, r.m, r.n, 0});
  if (r.is_w && r.m >= 1 && r.min_spf_of_w && 2 * *r.min_spf_of_w < r.n + 1)
    out.push_back({ViolationKind::small_spf_w_number, r.m, r.n, *r.min_spf_of_w});
  return out;
}

/// One record per offset m in [m_lo, m_hi]. Pure; safe to run per thread.
inline ScanChunk scan_chunk(u64 m_lo, u64 m_hi, u64 n, bool measure_time = false) {
  if (m_hi < m_lo) throw domain_error("scan range is empty");
  const u64 hi = checked_add(m_hi, n);
  WindowChecker checker(n);
  SpfSegment spf(m_lo + 1, hi);
  ScanChunk out;
  out.records.reserve(m_hi - m_lo + 1);
  for (u64 m = m_lo;; ++m) {
    const auto t0 = std::chrono::steady_clock::now();
    ScanRecord r;
    r.m = m;
    r.n = n;
    checker.classify(m);
    for (u64 i = 0; i < n; ++i) {
      const u64 x = m + 1 + i;
      if (!r.has_prime && spf.is_prime_value(x)) r.has_prime = true;
      if (checker.witness_prime(i) == 0) {
        ++r.w_count;
        const u64 s = spf.spf(x);
        if (!r.min_spf_of_w || s < *r.min_spf_of_w) r.min_spf_of_w = s;
      }
    }
    r.is_w = r.w_count > 0;
    if (measure_time)
      r.elapsed_nanos = static_cast<u64>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count());
    for (auto& v : violations_of(r)) out.violations.push_back(v);
    out.records.push_back(r);
    if (m == m_hi) break;
  }
  return out;
}

/// Runs `fn(chunk_index)` for chunk indices [0, count) on up to `threads`
/// workers and hands results to `sink` strictly in ascending index order.
template <class Result, class Fn, class Sink>
void ordered_parallel(u64 count, unsigned threads, Fn fn, Sink sink) {
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (u64 c = 0; c < count; ++c) sink(c, fn(c));
    return;
  }
  for (u64 base = 0; base < count; base += threads) {
    const u64 batch = std::min<u64>(threads, count - base);
    std::vector<Result> results(batch);
    {
      std::vector<std::jthread> pool;
      for (u64 i = 0; i < batch; ++i) pool.emplace_back([&, i] { results[i] = fn(base + i); });
    }
    for (u64 i = 0; i < batch; ++i) sink(base + i, std::move(results[i]));
  }
}

/// Number of chunks covering offsets [m_from, m_to].
inline u64 chunk_count(u64 m_from, u64 m_to, u64 chunk) { return (m_to - m_from) / chunk + 1; }

/// Offsets covered by chunk c.
inline std::pair<u64, u64> chunk_bounds(u64 m_from, u64 m_to, u64 chunk, u64 c) {
  const u64 lo = m_from + c * chunk;
  const u64 hi = (m_to - lo < chunk) ? m_to : lo + chunk - 1;
  return {lo, hi};
}

/// Scans offsets m_from..m_to with window length n. Records arrive in
/// ascending m; violations are expected to be empty.
inline ScanChunk scan_windows(u64 m_from, u64 m_to, u64 n, const ScanOptions& opts = {}) {
  if (m_from > m_to) throw domain_error("scan needs m_from <= m_to");
  if (n < 2) throw domain_error("window length must be >= 2");
  if (opts.chunk == 0) throw domain_error("chunk size must be positive");
  checked_add(m_to, n);
  ScanChunk all;
  ordered_parallel<ScanChunk>(
      chunk_count(m_from, m_to, opts.chunk), opts.threads,
      [&](u64 c) {
        auto [lo, hi] = chunk_bounds(m_from, m_to, opts.chunk, c);
        return scan_chunk(lo, hi, n, opts.measure_time);
      },
      [&](u64, ScanChunk part) {
        all.records.insert(all.records.end(), part.records.begin(), part.records.end());
        all.violations.insert(all.violations.end(), part.violations.begin(), part.violations.end());
      });
  return all;
}

// ---------------------------------------------------------------------------
// square intervals

struct SquareIntervalRecord {
  u64 m = 0;
  bool has_prime = false; // prime in (m^2, (m+1)^2)
  bool is_w = false;      // window m^2+1 .. m^2+2m

  friend bool operator==(const SquareIntervalRecord&, const SquareIntervalRecord&) = default;
};

struct SquareIntervalScan {
  std::vector<SquareIntervalRecord> records;
  std::vector<u64> mismatches;
};

/// For each m in [1, m_max] decides, independently, whether (m^2, (m+1)^2)
/// holds a prime and whether the window of its 2m integers is W.
inline SquareIntervalScan theorem2_scan(u64 m_max) {
  if (m_max < 1) throw domain_error("theorem2_scan needs m_max >= 1");
  checked_mul(checked_add(m_max, 1), checked_add(m_max, 1));
  SquareIntervalScan out;
  for (u64 m = 1; m <= m_max; ++m) {
    SquareIntervalRecord r;
    r.m = m;
    const u64 lo = m * m, hi = (m + 1) * (m + 1);
    for (u64 x = lo + 1; x < hi && !r.has_prime; ++x) r.has_prime = is_prime(x);
    r.is_w = window_is_w(Window{lo, 2 * m});
    if (r.has_prime != r.is_w) out.mismatches.push_back(m);
    out.records.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// short intervals of length floor(m^(1/2 + eps))

struct Rational {
  u64 num = 0;
  u64 den = 1;
};

/// Largest n with n^den <= m^num, i.e. floor(m^(num/den)), exactly.
inline u64 floor_rational_power(u64 m, u64 num, u64 den) {
  if (den == 0) throw domain_error("zero denominator");
  if (m <= 1 || num == 0) return num == 0 ? 1 : m;
  const BigNat target = boost::multiprecision::pow(BigNat(m), static_cast<unsigned>(num));
  auto fits = [&](u64 x) { return boost::multiprecision::pow(BigNat(x), static_cast<unsigned>(den)) <= target; };
  const double guess = std::pow(static_cast<double>(m), static_cast<double>(num) / static_cast<double>(den));
  u64 n = guess < 1.0 ? 1 : static_cast<u64>(guess);
  while (n > 1 && !fits(n)) --n;
  while (fits(n + 1)) ++n;
  return n;
}

struct ShortIntervalRecord {
  u64 m = 0;
  u64 n = 0;
  bool has_prime = false; // prime in (m, m+n]
  bool is_w = false;

  friend bool operator==(const ShortIntervalRecord&, const ShortIntervalRecord&) = default;
};

struct ShortIntervalScan {
  std::vector<ShortIntervalRecord> records;
  std::vector<u64> mismatches;
  u64 skipped = 0; // offsets where n < 2
};

/// Window length for offset m: floor(m^(1/2 + eps)) with eps = num/den.
inline u64 short_interval_length(u64 m, Rational eps) {
  // 1/2 + p/q = (q + 2p) / (2q)
  const u64 num = eps.den + 2 * eps.num, den = 2 * eps.den;
  const u64 g = gcd(num, den);
  return floor_rational_power(m, num / g, den / g);
}

inline ShortIntervalScan theorem3_scan(Rational eps, u64 m_from, u64 m_to) {
  if (eps.den == 0 || eps.num == 0 || 2 * eps.num >= eps.den)
    throw domain_error("theorem3_scan needs 0 < eps < 1/2");
  if (m_from > m_to) throw domain_error("theorem3_scan needs m_from <= m_to");
  ShortIntervalScan out;
  for (u64 m = m_from;; ++m) {
    const u64 n = short_interval_length(m, eps);
    if (n < 2) {
      ++out.skipped;
    } else {
      ShortIntervalRecord r{m, n, contains_prime(Window{m, n}), window_is_w(Window{m, n})};
      if (r.has_prime != r.is_w) out.mismatches.push_back(m);
      out.records.push_back(r);
    }
    if (m == m_to) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// non-W lengths and starts

struct HResult {
  u64 m = 0;
  u64 n_max = 0;
  std::vector<u64> nonw_lengths;
  std::optional<u64> largest_nonw;

  friend bool operator==(const HResult&, const HResult&) = default;
};

/// Every length n in [2, n_max] whose window at offset m is not W. Non-W is
/// not monotone in n, so each length is checked.
inline HResult h_scan(u64 m, u64 n_max) {
  if (n_max < 2) throw domain_error("h_scan needs n_max >= 2");
  checked_add(m, n_max);
  HResult out{m, n_max, {}, std::nullopt};
  for (u64 n = 2; n <= n_max; ++n)
    if (!WindowChecker(n).is_w(m)) out.nonw_lengths.push_back(n);
  if (!out.nonw_lengths.empty()) out.largest_nonw = out.nonw_lengths.back();
  return out;
}

/// Smallest m <= m_max whose window of length n is not W.
inline std::optional<u64> min_nonw_start(u64 n, u64 m_max) {
  if (n < 2) throw domain_error("min_nonw_start needs n >= 2");
  checked_add(m_max, n);
  WindowChecker checker(n);
  for (u64 m = 0;; ++m) {
    if (!checker.is_w(m)) return m;
    if (m == m_max) return std::nullopt;
  }
}

} // namespace wseq
