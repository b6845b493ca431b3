#pragma once

// W-sequence decision engine.
//
// A strictly increasing sequence of at least two positive integers is a
// W sequence when some element is coprime to every other element; such an
// element is a W number. Reports list every W number and, for each blocked
// element, a witness (smallest shared prime, then smallest partner index).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "wseq/arith.hpp"

namespace wseq {

// ---------------------------------------------------------------------------
// types

template <class Int>
void validate_sequence(std::span<const Int> elements) {
  if (elements.size() < 2) throw domain_error("sequence needs at least two elements");
  if (elements.front() < 1) throw domain_error("sequence elements must be positive");
  for (std::size_t i = 1; i < elements.size(); ++i)
    if (!(elements[i - 1] < elements[i]))
      throw domain_error("sequence must be strictly increasing (position " + std::to_string(i) + ")");
}

/// Strictly increasing machine-tier sequence of length >= 2, all >= 1.
class Sequence {
public:
  explicit Sequence(std::vector<u64> elements) : elements_(std::move(elements)) {
    validate_sequence<u64>(elements_);
  }

  std::span<const u64> elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  u64 operator[](std::size_t i) const { return elements_[i]; }

private:
  std::vector<u64> elements_;
};

template <class Int>
struct Witness {
  Int prime{};
  std::size_t partner = 0;

  friend bool operator==(const Witness&, const Witness&) = default;
};

template <class Int>
struct BasicVerdict {
  std::size_t index = 0;
  bool coprime_to_rest = false;
  std::optional<Witness<Int>> witness; // present iff blocked

  friend bool operator==(const BasicVerdict&, const BasicVerdict&) = default;
};

/// Indices are zero-based positions in the sequence.
template <class Int>
struct BasicWReport {
  bool is_w = false;
  std::vector<BasicVerdict<Int>> verdicts;
  std::vector<std::size_t> w_indices;

  friend bool operator==(const BasicWReport&, const BasicWReport&) = default;
};

using Verdict = BasicVerdict<u64>;
using WReport = BasicWReport<u64>;

/// Fills w_indices / is_w from the verdicts.
template <class Int>
void finalize_report(BasicWReport<Int>& report) {
  report.w_indices.clear();
  for (const auto& v : report.verdicts)
    if (v.coprime_to_rest) report.w_indices.push_back(v.index);
  report.is_w = !report.w_indices.empty();
}

// ---------------------------------------------------------------------------
// quadratic oracle

/// Coprime-to-rest flags by all-pairs gcd.
template <class Int>
std::vector<bool> coprime_flags(std::span<const Int> elements) {
  const std::size_t n = elements.size();
  std::vector<bool> flags(n, true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (gcd(elements[i], elements[j]) != 1) flags[i] = flags[j] = false;
  return flags;
}

/// Ground truth: element i is a W number iff gcd(a_i, a_j) = 1 for all j != i.
/// Witness = lexicographically smallest (spf(gcd(a_i, a_j)), j).
template <class Int>
BasicWReport<Int> w_report_oracle(std::span<const Int> elements) {
  validate_sequence(elements);
  const std::size_t n = elements.size();
  BasicWReport<Int> report;
  report.verdicts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = report.verdicts[i];
    v.index = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Int g = gcd(elements[i], elements[j]);
      if (g == 1) continue;
      if (v.witness && v.witness->prime == 2) break;
      const Int q = smallest_prime_factor(g);
      if (!v.witness || q < v.witness->prime) v.witness = Witness<Int>{q, j};
    }
    v.coprime_to_rest = !v.witness.has_value();
  }
  finalize_report(report);
  return report;
}

template <class Int>
BasicWReport<Int> w_report_oracle(const std::vector<Int>& elements) {
  return w_report_oracle(std::span<const Int>(elements));
}

inline WReport w_report_oracle(const Sequence& seq) { return w_report_oracle(seq.elements()); }

// ---------------------------------------------------------------------------
// factor-map method

/// Builds the report from precomputed factorizations: each prime maps to the
/// set of indices it divides, and an element is a W number iff every one of
/// its primes maps to a singleton.
inline WReport w_report_from_factors(std::span<const Factorization> factors) {
  const std::size_t n = factors.size();
  std::vector<std::pair<u64, std::size_t>> occurrences; // (prime, index)
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& pp : factors[i].factors) occurrences.emplace_back(pp.prime, i);
  std::sort(occurrences.begin(), occurrences.end());

  WReport report;
  report.verdicts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = report.verdicts[i];
    v.index = i;
    for (const auto& pp : factors[i].factors) {
      auto [lo, hi] = std::equal_range(
          occurrences.begin(), occurrences.end(), std::pair<u64, std::size_t>{pp.prime, 0},
          [](const auto& a, const auto& b) { return a.first < b.first; });
      if (hi - lo < 2) continue;
      const std::size_t partner = lo->second != i ? lo->second : (lo + 1)->second;
      v.witness = Witness<u64>{pp.prime, partner};
      break;
    }
    v.coprime_to_rest = !v.witness.has_value();
  }
  finalize_report(report);
  return report;
}

/// Generic fast path: factorize every element, then the factor map.
/// Throws unresolved_error carrying the element index when factorization
/// runs out of budget; never returns a guessed verdict.
inline WReport w_report(const Sequence& seq, const FactorOptions& opts = {}) {
  std::vector<Factorization> factors;
  factors.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    try {
      factors.push_back(factorize(seq[i], opts));
    } catch (const unresolved_error& e) {
      throw unresolved_error("element " + std::to_string(i) + " (" + std::to_string(seq[i]) +
                                 ") could not be factored: " + e.what(),
                             i);
    }
  }
  return w_report_from_factors(factors);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators

/// Counter-based generator: output k of stream s under key `seed` is a pure
/// function of (seed, s, k), so chunks can be generated in any order.
class CounterRng {
public:
  CounterRng(u64 seed, u64 stream) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  u64 next() { return mix(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform on [1, bound] (rejection, no modulo bias).
  u64 uniform(u64 bound) {
    const u64 limit = std::numeric_limits<u64>::max() - std::numeric_limits<u64>::max() % bound;
    u64 x;
    do {
      x = next();
    } while (x >= limit);
    return 1 + x % bound;
  }

  static u64 mix(u64 z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  u64 key_;
  u64 counter_ = 0;
};

struct Estimate {
  double estimate = 0.0;
  double std_error = 0.0; // binomial standard error; 0 when exhaustive
  u64 successes = 0;
  u64 trials = 0;
  bool exhaustive = false;

  friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct EstimatorOptions {
  u64 chunk = 1u << 16;
  unsigned threads = 1;
  /// Sample spaces with at most this many tuples are enumerated exactly.
  u64 exhaustive_limit = 1u << 16;
};

/// True iff some draw is coprime to every other draw (multiset semantics:
/// equal draws x, x are coprime only when x = 1).
inline bool has_coprime_to_rest(std::span<const u64> xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < xs.size() && ok; ++j)
      if (j != i && std::gcd(xs[i], xs[j]) != 1) ok = false;
    if (ok) return true;
  }
  return false;
}

inline bool pairwise_coprime(std::span<const u64> xs) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      if (std::gcd(xs[i], xs[j]) != 1) return false;
  return true;
}

namespace detail {

template <class Pred>
Estimate estimate_fraction(unsigned k, u64 bound, u64 trials, u64 seed, const EstimatorOptions& opts,
                           Pred pred) {
  Estimate out;
  std::vector<u64> draws(k);

  // exhaustive enumeration when bound^k is small
  u64 space = 1;
  bool small = true;
  for (unsigned i = 0; i < k && small; ++i) {
    if (space > opts.exhaustive_limit / bound) small = false;
    else space *= bound;
  }
  if (small) {
    std::fill(draws.begin(), draws.end(), 1);
    for (u64 t = 0; t < space; ++t) {
      out.successes += pred(std::span<const u64>(draws));
      for (unsigned i = 0; i < k; ++i) {
        if (++draws[i] <= bound) break;
        draws[i] = 1;
      }
    }
    out.trials = space;
    out.exhaustive = true;
    out.estimate = static_cast<double>(out.successes) / static_cast<double>(space);
    return out;
  }

  const u64 chunks = (trials + opts.chunk - 1) / opts.chunk;
  auto run_chunk = [&](u64 c) {
    CounterRng rng(seed, c);
    std::vector<u64> xs(k);
    const u64 begin = c * opts.chunk, end = std::min(trials, begin + opts.chunk);
    u64 hits = 0;
    for (u64 t = begin; t < end; ++t) {
      for (auto& x : xs) x = rng.uniform(bound);
      hits += pred(std::span<const u64>(xs));
    }
    return hits;
  };

  const unsigned threads = std::max(1u, opts.threads);
  std::vector<u64> per_chunk(chunks, 0);
  if (threads == 1 || chunks == 1) {
    for (u64 c = 0; c < chunks; ++c) per_chunk[c] = run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (u64 c = w; c < chunks; c += threads) per_chunk[c] = run_chunk(c);
      });
  }
  for (u64 h : per_chunk) out.successes += h;
  out.trials = trials;
  const double p = static_cast<double>(out.successes) / static_cast<double>(trials);
  out.estimate = p;
  out.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return out;
}

inline void check_estimator_args(unsigned k, u64 bound, u64 trials) {
  if (k < 2) throw domain_error("estimator needs at least two draws");
  if (bound < 2) throw domain_error("estimator bound must be >= 2");
  if (trials < 1) throw domain_error("estimator needs at least one trial");
}

} // namespace detail

/// Fraction of trials in which m uniform draws from [1, bound] contain one
/// draw coprime to all the others.
inline Estimate estimate_exists_coprime_prob(unsigned m, u64 bound, u64 trials, u64 seed,
                                             const EstimatorOptions& opts = {}) {
  detail::check_estimator_args(m, bound, trials);
  return detail::estimate_fraction(m, bound, trials, seed, opts,
                                   [](std::span<const u64> xs) { return has_coprime_to_rest(xs); });
}

/// Fraction of trials in which k uniform draws from [1, bound] are pairwise
/// coprime.
inline Estimate estimate_pairwise_coprime_prob(unsigned k, u64 bound, u64 trials, u64 seed,
                                               const EstimatorOptions& opts = {}) {
  detail::check_estimator_args(k, bound, trials);
  return detail::estimate_fraction(k, bound, trials, seed, opts,
                                   [](std::span<const u64> xs) { return pairwise_coprime(xs); });
}

/// 1/zeta(k), the density claimed for k pairwise-coprime integers.
inline double claimed_pairwise_density(unsigned k) { return 1.0 / boost::math::zeta(static_cast<double>(k)); }

/// (1/zeta(2))^(m-1), the density claimed for m integers containing one
/// coprime to the rest.
inline double claimed_exists_density(unsigned m) {
  return std::pow(1.0 / boost::math::zeta(2.0), static_cast<double>(m - 1));
}

} // namespace wseq
