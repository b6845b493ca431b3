#pragma once

// W checks for non-consecutive families:
//   squares plus one       1^2+1, 2^2+1, ..., m^2+1
//   arithmetic progression a, a+b, ..., a+(b-1)b      (gcd(a,b) = 1, 0 < a < b, b > 2)
//   shifted odd primes     2+3, 2+5, 2+7, ... (m terms, first odd prime is 3)
//   Fibonacci windows      F_{m+1}, ..., F_{m+n}      (F_1 = F_2 = 1)
//
// Every fast path is paired with an independent slow path; disagreement
// throws consistency_error.

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wseq/arith.hpp"
#include "wseq/wcore.hpp"

namespace wseq {

template <class Int>
struct BasicFamilyResult {
  std::string family_id;
  std::vector<std::pair<std::string, u64>> parameters;
  bool is_w = false;
  std::vector<std::size_t> w_indices;
  std::optional<BasicWReport<Int>> counterexample; // present iff !is_w

  friend bool operator==(const BasicFamilyResult&, const BasicFamilyResult&) = default;
};

using FamilyResult = BasicFamilyResult<u64>;

template <class Int>
BasicFamilyResult<Int> make_family_result(std::string id, std::vector<std::pair<std::string, u64>> params,
                                          BasicWReport<Int> report) {
  BasicFamilyResult<Int> r;
  r.family_id = std::move(id);
  r.parameters = std::move(params);
  r.is_w = report.is_w;
  r.w_indices = report.w_indices;
  if (!report.is_w) r.counterexample = std::move(report);
  return r;
}

namespace detail {

/// Factorizes every element; on failure reports the one-based family index.
inline std::vector<Factorization> factor_all(std::span<const u64> xs, const char* what,
                                             const FactorOptions& opts) {
  std::vector<Factorization> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    try {
      out.push_back(factorize(xs[i], opts));
    } catch (const unresolved_error& e) {
      throw unresolved_error(std::string(what) + ": term i=" + std::to_string(i + 1) + " (" +
                                 std::to_string(xs[i]) + ") could not be factored",
                             i);
    }
  }
  return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// squares plus one

inline std::vector<u64> squares_plus_one(u64 m) {
  checked_add(checked_mul(m, m), 1);
  std::vector<u64> xs;
  xs.reserve(m);
  for (u64 i = 1; i <= m; ++i) xs.push_back(checked_add(checked_mul(i, i), 1));
  return xs;
}

inline FamilyResult squares_plus_one_check(u64 m, const FactorOptions& opts = {}) {
  if (m < 2) throw domain_error("squares_plus_one_check needs m >= 2");
  const auto xs = squares_plus_one(m);
  return make_family_result<u64>("squares_plus_one", {{"m", m}},
                                 w_report_from_factors(detail::factor_all(xs, "squares_plus_one", opts)));
}

/// One result per m in [m_from, m_to]; elements are factored once and each
/// prefix reuses them.
inline std::vector<FamilyResult> squares_plus_one_sweep(u64 m_from, u64 m_to, const FactorOptions& opts = {}) {
  if (m_from < 2 || m_to < m_from) throw domain_error("squares_plus_one_sweep needs 2 <= m_from <= m_to");
  const auto xs = squares_plus_one(m_to);
  const auto fs = detail::factor_all(xs, "squares_plus_one", opts);
  std::vector<FamilyResult> out;
  for (u64 m = m_from; m <= m_to; ++m)
    out.push_back(make_family_result<u64>("squares_plus_one", {{"m", m}},
                                          w_report_from_factors(std::span(fs).first(m))));
  return out;
}

// ---------------------------------------------------------------------------
// arithmetic progressions a, a+b, ..., a+(b-1)b

inline void validate_ap(u64 a, u64 b) {
  if (b <= 2) throw domain_error("ap_check needs b > 2");
  if (a == 0 || a >= b) throw domain_error("ap_check needs 0 < a < b");
  if (gcd(a, b) != 1) throw domain_error("ap_check needs gcd(a, b) = 1");
}

inline std::vector<u64> ap_terms(u64 a, u64 b) {
  std::vector<u64> xs(b);
  for (u64 k = 0; k < b; ++k) xs[k] = checked_add(a, checked_mul(k, b));
  return xs;
}

/// Residue-class fast path. A prime shared by terms k1 < k2 divides
/// (k2 - k1) b and not b, so it is below b; its multiples among the terms
/// are the indices k = -a/b (mod p).
inline WReport ap_report_residues(u64 a, u64 b) {
  validate_ap(a, b);
  std::vector<u64> witness(b, 0);
  std::vector<std::size_t> partner(b, 0);
  for (u64 p : primes_up_to(b - 1)) {
    if (b % p == 0) continue;
    const u64 first = mul_mod(p - a % p, inv_mod(b % p, p), p);
    if (first + p >= b) continue;
    for (u64 k = first; k < b; k += p) {
      if (witness[k]) continue;
      witness[k] = p;
      partner[k] = (k == first) ? first + p : first;
    }
  }
  WReport r;
  r.verdicts.resize(b);
  for (u64 k = 0; k < b; ++k) {
    r.verdicts[k].index = k;
    r.verdicts[k].coprime_to_rest = witness[k] == 0;
    if (witness[k]) r.verdicts[k].witness = Witness<u64>{witness[k], partner[k]};
  }
  finalize_report(r);
  return r;
}

/// Residue-class result, cross-checked against the factor-map method.
inline FamilyResult ap_check(u64 a, u64 b, const FactorOptions& opts = {}) {
  validate_ap(a, b);
  WReport fast = ap_report_residues(a, b);
  const auto terms = ap_terms(a, b);
  const WReport slow = w_report_from_factors(detail::factor_all(terms, "ap", opts));
  if (fast != slow)
    throw consistency_error("ap_check: residue path and factor map disagree for a=" + std::to_string(a) +
                            ", b=" + std::to_string(b));
  return make_family_result<u64>("ap", {{"a", a}, {"b", b}}, std::move(fast));
}

// ---------------------------------------------------------------------------
// shifted odd primes 2 + p_i

/// The first m odd primes, 3, 5, 7, ...
inline std::vector<u64> first_odd_primes(u64 m) {
  u64 limit = 64;
  for (;;) {
    auto ps = primes_up_to(limit);
    if (ps.size() >= m + 1) return {ps.begin() + 1, ps.begin() + 1 + static_cast<std::ptrdiff_t>(m)};
    limit = checked_mul(limit, 2);
  }
}

inline std::vector<u64> shifted_primes(u64 m) {
  auto xs = first_odd_primes(m);
  for (auto& x : xs) x = checked_add(x, 2);
  return xs;
}

inline FamilyResult shifted_primes_check(u64 m, const FactorOptions& opts = {}) {
  if (m < 2) throw domain_error("shifted_primes_check needs m >= 2");
  const auto xs = shifted_primes(m);
  return make_family_result<u64>("shifted_primes", {{"m", m}},
                                 w_report_from_factors(detail::factor_all(xs, "shifted_primes", opts)));
}

inline std::vector<FamilyResult> shifted_primes_sweep(u64 m_from, u64 m_to, const FactorOptions& opts = {}) {
  if (m_from < 2 || m_to < m_from) throw domain_error("shifted_primes_sweep needs 2 <= m_from <= m_to");
  const auto xs = shifted_primes(m_to);
  const auto fs = detail::factor_all(xs, "shifted_primes", opts);
  std::vector<FamilyResult> out;
  for (u64 m = m_from; m <= m_to; ++m)
    out.push_back(make_family_result<u64>("shifted_primes", {{"m", m}},
                                          w_report_from_factors(std::span(fs).first(m))));
  return out;
}

// ---------------------------------------------------------------------------
// Fibonacci windows

/// Fibonacci terms F_1..F_K with cached big-tier primality verdicts.
class FibonacciTable {
public:
  explicit FibonacciTable(u64 max_index) : terms_(max_index + 1), primality_(max_index + 1) {
    if (max_index < 1) throw domain_error("FibonacciTable needs max_index >= 1");
    terms_[1] = 1;
    if (max_index >= 2) terms_[2] = 1;
    for (u64 i = 3; i <= max_index; ++i) terms_[i] = terms_[i - 1] + terms_[i - 2];
    for (u64 i = 1; i <= max_index; ++i) primality_[i] = is_probable_prime(terms_[i]);
  }

  u64 max_index() const noexcept { return terms_.size() - 1; }
  const BigNat& term(u64 i) const { return terms_.at(i); }
  const PrimalityVerdict& primality(u64 i) const { return primality_.at(i); }

private:
  std::vector<BigNat> terms_;
  std::vector<PrimalityVerdict> primality_;
};

struct FibonacciWindowResult {
  BasicFamilyResult<BigNat> family;
  bool has_prime = false;
  bool primality_probabilistic = false; // some term's verdict is probabilistic
  bool consistent = true;               // !has_prime || is_w
};

/// Index rule: gcd(F_i, F_j) = F_gcd(i,j), and F_k = 1 exactly for k <= 2.
inline bool fib_indices_coprime(u64 i, u64 j) { return gcd(i, j) <= 2; }

/// W status of F_{m+1}..F_{m+n}, by the index rule and by big-integer
/// pairwise gcd. The counterexample report (non-W only) carries witnesses:
/// smallest prime of gcd(F_i, F_j), then smallest partner.
inline FibonacciWindowResult fibonacci_window_check(u64 m, u64 n, const FibonacciTable* table = nullptr) {
  if (m < 1) throw domain_error("fibonacci_window_check needs m >= 1");
  if (n < 2) throw domain_error("fibonacci_window_check needs n >= 2");
  const u64 top = checked_add(m, n);
  std::optional<FibonacciTable> local;
  if (!table || table->max_index() < top) table = &local.emplace(top);

  std::vector<bool> fast(n, true), slow(n, true);
  for (u64 a = 0; a < n; ++a)
    for (u64 b = a + 1; b < n; ++b) {
      if (!fib_indices_coprime(m + 1 + a, m + 1 + b)) fast[a] = fast[b] = false;
      if (gcd(table->term(m + 1 + a), table->term(m + 1 + b)) != 1) slow[a] = slow[b] = false;
    }
  if (fast != slow)
    throw consistency_error("fibonacci_window_check: index rule and big gcd disagree at m=" + std::to_string(m) +
                            ", n=" + std::to_string(n));

  FibonacciWindowResult out;
  BasicWReport<BigNat> report;
  report.verdicts.resize(n);
  for (u64 a = 0; a < n; ++a) {
    report.verdicts[a].index = a;
    report.verdicts[a].coprime_to_rest = fast[a];
  }
  finalize_report(report);
  if (!report.is_w) {
    std::vector<BigNat> terms;
    for (u64 a = 0; a < n; ++a) terms.push_back(table->term(m + 1 + a));
    report = w_report_oracle(terms); // m >= 1 keeps the terms strictly increasing
  }

  for (u64 a = 0; a < n; ++a) {
    const auto& v = table->primality(m + 1 + a);
    out.has_prime = out.has_prime || v.prime;
    out.primality_probabilistic = out.primality_probabilistic || v.probabilistic;
  }
  out.family = make_family_result<BigNat>("fibonacci", {{"m", m}, {"n", n}}, std::move(report));
  out.consistent = !out.has_prime || out.family.is_w;
  return out;
}

struct FibonacciSweep {
  u64 windows = 0;
  u64 w_windows = 0;
  u64 windows_with_prime = 0;
  std::vector<std::pair<u64, u64>> non_w;        // (m, n)
  std::vector<std::pair<u64, u64>> inconsistent; // prime present but not W
};

/// Every window with m >= 1, n >= 2, m + n <= max_sum. Both paths run
/// incrementally per offset: extending a window by one term only adds the
/// new term's pairs.
inline FibonacciSweep fibonacci_sweep(u64 max_sum) {
  if (max_sum < 3) throw domain_error("fibonacci_sweep needs max_sum >= 3");
  FibonacciTable table(max_sum);
  // big-gcd coprimality of every index pair, computed once
  std::vector<std::vector<bool>> coprime(max_sum + 1, std::vector<bool>(max_sum + 1, true));
  for (u64 i = 1; i <= max_sum; ++i)
    for (u64 j = i + 1; j <= max_sum; ++j)
      coprime[i][j] = coprime[j][i] = gcd(table.term(i), table.term(j)) == 1;

  FibonacciSweep out;
  for (u64 m = 1; m + 2 <= max_sum; ++m) {
    std::vector<bool> fast, slow;
    bool has_prime = false;
    for (u64 k = m + 1; k <= max_sum; ++k) {
      fast.push_back(true);
      slow.push_back(true);
      has_prime = has_prime || table.primality(k).prime;
      const std::size_t last = fast.size() - 1;
      for (std::size_t a = 0; a < last; ++a) {
        const u64 i = m + 1 + a;
        if (!fib_indices_coprime(i, k)) fast[a] = fast[last] = false;
        if (!coprime[i][k]) slow[a] = slow[last] = false;
      }
      if (fast.size() < 2) continue;
      if (fast != slow)
        throw consistency_error("fibonacci_sweep: index rule and big gcd disagree at m=" + std::to_string(m) +
                                ", n=" + std::to_string(fast.size()));
      const bool is_w = std::find(fast.begin(), fast.end(), true) != fast.end();
      ++out.windows;
      out.w_windows += is_w;
      out.windows_with_prime += has_prime;
      if (!is_w) out.non_w.emplace_back(m, fast.size());
      if (has_prime && !is_w) out.inconsistent.emplace_back(m, fast.size());
    }
  }
  return out;
}

} // namespace wseq
