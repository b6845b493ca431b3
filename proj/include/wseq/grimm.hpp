#pragma once

// Grimm's conjecture on consecutive composites: every maximal run of
// composites m+1..m+n admits distinct primes p_1..p_n with p_i | m+i.
// Verified here as a perfect bipartite matching between run elements and
// the union of their prime divisors.

#include <algorithm>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "wseq/arith.hpp"
#include "wseq/windows.hpp"

namespace wseq {

/// The composites m+1..m+n, with m and m+n+1 prime.
struct CompositeRun {
  u64 m = 0;
  u64 n = 0;

  u64 first() const { return m + 1; }
  u64 last() const { return m + n; }

  friend bool operator==(const CompositeRun&, const CompositeRun&) = default;
};

/// Every maximal composite run whose elements are all <= limit, ascending.
/// The last run may close on the first prime above limit.
inline std::vector<CompositeRun> composite_runs(u64 limit) {
  if (limit < 4) throw domain_error("composite_runs needs limit >= 4");
  auto primes = primes_up_to(limit);
  u64 next = checked_add(limit, 1);
  while (!is_prime(next)) next = checked_add(next, 1);
  primes.push_back(next);
  std::vector<CompositeRun> runs;
  for (std::size_t i = 1; i < primes.size(); ++i)
    if (primes[i] - primes[i - 1] >= 2 && primes[i] - 1 <= limit) runs.push_back({primes[i - 1], primes[i] - primes[i - 1] - 1});
  return runs;
}

// ---------------------------------------------------------------------------
// maximum bipartite matching

/// Hopcroft-Karp on a bipartite graph given as left-vertex adjacency lists.
/// Deterministic: vertices and edges are visited in the given order.
class BipartiteMatcher {
public:
  static constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();

  BipartiteMatcher(std::size_t right_count, std::vector<std::vector<std::size_t>> adjacency)
      : adj_(std::move(adjacency)), match_left_(adj_.size(), kFree), match_right_(right_count, kFree),
        dist_(adj_.size()) {}

  /// Runs to completion; returns the matching size.
  std::size_t solve() {
    std::size_t size = 0;
    while (bfs()) {
      it_.assign(adj_.size(), 0);
      for (std::size_t u = 0; u < adj_.size(); ++u)
        if (match_left_[u] == kFree && dfs(u)) ++size;
    }
    return size;
  }

  std::size_t left_match(std::size_t u) const { return match_left_[u]; }

  /// Left vertices reachable from unmatched left vertices along alternating
  /// paths, and their neighbourhood. After solve() on a deficient graph this
  /// set has more members than neighbours (a Hall violator).
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> alternating_closure() const {
    std::vector<char> seen_left(adj_.size(), 0), seen_right(match_right_.size(), 0);
    std::queue<std::size_t> q;
    for (std::size_t u = 0; u < adj_.size(); ++u)
      if (match_left_[u] == kFree) {
        seen_left[u] = 1;
        q.push(u);
      }
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj_[u]) {
        if (seen_right[v]) continue;
        seen_right[v] = 1;
        const std::size_t w = match_right_[v];
        if (w != kFree && !seen_left[w]) {
          seen_left[w] = 1;
          q.push(w);
        }
      }
    }
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    for (std::size_t u = 0; u < seen_left.size(); ++u)
      if (seen_left[u]) out.first.push_back(u);
    for (std::size_t v = 0; v < seen_right.size(); ++v)
      if (seen_right[v]) out.second.push_back(v);
    return out;
  }

private:
  static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

  bool bfs() {
    std::queue<std::size_t> q;
    bool found = false;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      if (match_left_[u] == kFree) {
        dist_[u] = 0;
        q.push(u);
      } else {
        dist_[u] = kInf;
      }
    }
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj_[u]) {
        const std::size_t w = match_right_[v];
        if (w == kFree) {
          found = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t u) {
    for (; it_[u] < adj_[u].size(); ++it_[u]) {
      const std::size_t v = adj_[u][it_[u]];
      const std::size_t w = match_right_[v];
      if (w == kFree || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_left_[u] = v;
        match_right_[v] = u;
        ++it_[u];
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_left_, match_right_;
  std::vector<std::size_t> dist_, it_;
};

// ---------------------------------------------------------------------------
// Grimm assignments

struct GrimmPair {
  u64 element = 0;
  u64 prime = 0;

  friend bool operator==(const GrimmPair&, const GrimmPair&) = default;
};

/// One pair per run element, in ascending element order.
struct GrimmAssignment {
  std::vector<GrimmPair> pairs;

  friend bool operator==(const GrimmAssignment&, const GrimmAssignment&) = default;
};

/// A run without a perfect assignment. `elements` is a Hall-violating set:
/// together they are divisible by only `primes.size()` < `elements.size()`
/// distinct primes.
struct GrimmFinding {
  CompositeRun run;
  std::size_t deficiency = 0;
  std::vector<u64> elements;
  std::vector<u64> primes;
};

struct GrimmOutcome {
  CompositeRun run;
  std::size_t matched = 0;
  std::optional<GrimmAssignment> assignment;
  std::optional<GrimmFinding> finding;
};

struct GrimmOptions {
  /// Feed elements to the matcher in descending order (the assignment is
  /// still reported in ascending element order).
  bool reverse_elements = false;
  unsigned threads = 1;
  FactorOptions factor;
};

inline void validate_run(const CompositeRun& run) {
  if (run.n < 1) throw domain_error("composite run must be non-empty");
  checked_add(run.m, checked_add(run.n, 1));
}

/// Maximum matching between run elements and their prime divisors.
inline GrimmOutcome grimm_check(const CompositeRun& run, const GrimmOptions& opts = {}) {
  validate_run(run);
  std::vector<u64> elements;
  for (u64 i = 0; i < run.n; ++i) elements.push_back(run.first() + i);
  if (opts.reverse_elements) std::reverse(elements.begin(), elements.end());

  std::vector<std::vector<u64>> divisors;
  std::vector<u64> primes;
  for (u64 x : elements) {
    std::vector<u64> ps;
    for (const auto& pp : factorize(x, opts.factor).factors) ps.push_back(pp.prime);
    primes.insert(primes.end(), ps.begin(), ps.end());
    divisors.push_back(std::move(ps));
  }
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());

  std::vector<std::vector<std::size_t>> adj;
  for (const auto& ps : divisors) {
    std::vector<std::size_t> row;
    for (u64 p : ps) row.push_back(static_cast<std::size_t>(std::lower_bound(primes.begin(), primes.end(), p) - primes.begin()));
    adj.push_back(std::move(row));
  }

  BipartiteMatcher matcher(primes.size(), std::move(adj));
  GrimmOutcome out;
  out.run = run;
  out.matched = matcher.solve();
  if (out.matched == elements.size()) {
    GrimmAssignment a;
    for (std::size_t u = 0; u < elements.size(); ++u) a.pairs.push_back({elements[u], primes[matcher.left_match(u)]});
    std::sort(a.pairs.begin(), a.pairs.end(), [](const auto& x, const auto& y) { return x.element < y.element; });
    out.assignment = std::move(a);
  } else {
    auto [left, right] = matcher.alternating_closure();
    GrimmFinding f{run, elements.size() - out.matched, {}, {}};
    for (std::size_t u : left) f.elements.push_back(elements[u]);
    for (std::size_t v : right) f.primes.push_back(primes[v]);
    std::sort(f.elements.begin(), f.elements.end());
    out.finding = std::move(f);
  }
  return out;
}

inline std::optional<GrimmAssignment> grimm_assignment(const CompositeRun& run, const GrimmOptions& opts = {}) {
  return grimm_check(run, opts).assignment;
}

/// Checks an assignment without the matcher: one pair per element in order,
/// each prime divides its element, primes pairwise distinct.
inline bool verify_assignment(const CompositeRun& run, const GrimmAssignment& a) {
  if (a.pairs.size() != run.n) return false;
  std::vector<u64> seen;
  for (u64 i = 0; i < run.n; ++i) {
    const auto& [element, prime] = a.pairs[i];
    if (element != run.first() + i) return false;
    if (prime < 2 || element % prime != 0 || !is_prime(prime)) return false;
    seen.push_back(prime);
  }
  std::sort(seen.begin(), seen.end());
  return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
}

struct GrimmSweep {
  u64 runs = 0;
  u64 verified = 0;
  CompositeRun longest;
  std::vector<GrimmFinding> findings;
};

/// Matches every maximal composite run with elements <= limit. A run
/// without an assignment becomes a finding, not an exception.
inline GrimmSweep grimm_sweep(u64 limit, const GrimmOptions& opts = {}) {
  const auto runs = composite_runs(limit);
  GrimmSweep out;
  ordered_parallel<GrimmOutcome>(
      runs.size(), opts.threads, [&](u64 i) { return grimm_check(runs[i], opts); },
      [&](u64, GrimmOutcome r) {
        ++out.runs;
        if (r.run.n > out.longest.n) out.longest = r.run;
        if (r.assignment) {
          if (!verify_assignment(r.run, *r.assignment))
            throw consistency_error("matcher produced an invalid assignment for run starting at " +
                                    std::to_string(r.run.first()));
          ++out.verified;
        } else {
          out.findings.push_back(std::move(*r.finding));
        }
      });
  return out;
}

} // namespace wseq
