#pragma once

// Exact integer primitives: checked machine arithmetic, gcd, primality,
// factorization, sieving and Fibonacci numbers.
//
// Two tiers: `u64` for everything the scans touch, `BigNat` (arbitrary
// precision) for Fibonacci terms and other values that outgrow 64 bits.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/integer.hpp>

#include "wseq/errors.hpp"

namespace wseq {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using BigNat = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// checked machine arithmetic

inline u64 checked_add(u64 a, u64 b) {
  u64 r;
  if (__builtin_add_overflow(a, b, &r))
    throw overflow_error("u64 overflow in " + std::to_string(a) + " + " + std::to_string(b));
  return r;
}

inline u64 checked_mul(u64 a, u64 b) {
  u64 r;
  if (__builtin_mul_overflow(a, b, &r))
    throw overflow_error("u64 overflow in " + std::to_string(a) + " * " + std::to_string(b));
  return r;
}

/// floor(sqrt(n)), exact.
constexpr u64 isqrt(u64 n) {
  if (n < 2) return n;
  u64 x = static_cast<u64>(__builtin_sqrt(static_cast<double>(n)));
  while (x > 0 && (x > n / x)) --x;
  while ((x + 1) <= n / (x + 1)) ++x;
  return x;
}

// ---------------------------------------------------------------------------
// gcd

/// Euclid's algorithm. gcd(0, 0) is rejected.
template <class UInt>
UInt gcd(UInt a, UInt b) {
  if (a == 0 && b == 0) throw domain_error("gcd(0, 0) is undefined");
  while (b != 0) {
    UInt r = a % b;
    a = b;
    b = r;
  }
  return a;
}

inline BigNat gcd(const BigNat& a, const BigNat& b) {
  if (a == 0 && b == 0) throw domain_error("gcd(0, 0) is undefined");
  return boost::multiprecision::gcd(a, b);
}

// ---------------------------------------------------------------------------
// modular helpers

inline u64 mul_mod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

/// Inverse of a modulo m; requires gcd(a, m) = 1 and m >= 2.
inline u64 inv_mod(u64 a, u64 m) {
  // extended Euclid on signed 128-bit to stay exact
  __int128 t = 0, new_t = 1;
  __int128 r = m, new_r = a % m;
  while (new_r != 0) {
    __int128 q = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
  }
  if (r != 1) throw domain_error("inv_mod: arguments are not coprime");
  if (t < 0) t += m;
  return static_cast<u64>(t);
}

// ---------------------------------------------------------------------------
// sieving

/// All primes <= limit, ascending (odd-only sieve of Eratosthenes).
inline std::vector<u64> primes_up_to(u64 limit) {
  std::vector<u64> out;
  if (limit < 2) return out;
  out.push_back(2);
  if (limit < 3) return out;
  // index i represents 2i+1
  const u64 size = (limit - 1) / 2 + 1;
  std::vector<std::uint8_t> composite(size, 0);
  for (u64 i = 1; i < size; ++i) {
    if (composite[i]) continue;
    const u64 p = 2 * i + 1;
    out.push_back(p);
    if (p > limit / p) continue;
    for (u64 j = p * p / 2; j < size; j += p) composite[j] = 1;
  }
  return out;
}

/// Bound for the trial-division stage of factorize().
inline constexpr u64 kTrialDivisionBound = 10'000;

/// Shared, immutable table of primes <= kTrialDivisionBound.
inline const std::vector<u64>& trial_primes() {
  static const std::vector<u64> table = primes_up_to(kTrialDivisionBound);
  return table;
}

// ---------------------------------------------------------------------------
// primality

namespace detail {

inline bool strong_probable_prime(u64 n, u64 base, u64 d, unsigned s) {
  u64 x = pow_mod(base, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned r = 1; r < s; ++r) {
    x = mul_mod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

} // namespace detail

/// Deterministic for every 64-bit input: the first twelve prime bases are a
/// complete witness set below 3.3e24.
inline bool is_prime(u64 n) {
  static constexpr std::array<u64, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (n < 2) return false;
  for (u64 p : bases) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  if (n < 37 * 37) return true;
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : bases)
    if (!detail::strong_probable_prime(n, a, d, s)) return false;
  return true;
}

struct PrimalityVerdict {
  bool prime = false;
  /// Set when the verdict came from random-base Miller-Rabin (error < 2^-128).
  bool probabilistic = false;

  friend bool operator==(const PrimalityVerdict&, const PrimalityVerdict&) = default;
};

inline constexpr unsigned kBigPrimalityRounds = 64;

/// Big-tier primality. Exact when n fits 64 bits; otherwise 64 rounds of
/// Miller-Rabin with bases drawn from a generator seeded by n itself, so the
/// verdict is reproducible.
inline PrimalityVerdict is_probable_prime(const BigNat& n) {
  using boost::multiprecision::powm;
  if (n <= std::numeric_limits<u64>::max()) return {is_prime(static_cast<u64>(n)), false};

  for (u64 p : trial_primes())
    if (n % p == 0) return {false, false};

  const BigNat n_minus_1 = n - 1;
  BigNat d = n_minus_1;
  unsigned s = 0;
  while (!boost::multiprecision::bit_test(d, 0)) {
    d >>= 1;
    ++s;
  }

  // seed = low 64 bits of n xor its bit length
  const u64 low = static_cast<u64>(n & BigNat(std::numeric_limits<u64>::max()));
  std::mt19937_64 gen(low ^ (static_cast<u64>(boost::multiprecision::msb(n)) << 32));
  const BigNat span = n - 3; // bases in [2, n-2]

  for (unsigned round = 0; round < kBigPrimalityRounds; ++round) {
    BigNat r = 0;
    for (int limb = 0; limb < 4; ++limb) r = (r << 64) | BigNat(gen());
    BigNat a = 2 + r % span;
    BigNat x = powm(a, d, n);
    if (x == 1 || x == n_minus_1) continue;
    bool witness = true;
    for (unsigned i = 1; i < s; ++i) {
      x = x * x % n;
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return {false, false};
  }
  return {true, true};
}

// ---------------------------------------------------------------------------
// factorization

struct PrimePower {
  u64 prime = 0;
  unsigned exponent = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Prime factorization, primes strictly ascending. Empty for n = 1.
struct Factorization {
  std::vector<PrimePower> factors;

  bool empty() const noexcept { return factors.empty(); }

  /// Smallest prime factor; 0 for the empty factorization of 1.
  u64 smallest_prime() const noexcept { return factors.empty() ? 0 : factors.front().prime; }

  /// Product of prime^exponent (checked).
  u64 value() const {
    u64 v = 1;
    for (const auto& f : factors)
      for (unsigned e = 0; e < f.exponent; ++e) v = checked_mul(v, f.prime);
    return v;
  }

  friend bool operator==(const Factorization&, const Factorization&) = default;
};

struct FactorOptions {
  /// Iteration budget for each cycle-finding attempt.
  u64 rho_iterations = u64{1} << 22;
  /// Polynomials x^2 + c tried, c = 1, 2, ..., max_polynomials.
  unsigned max_polynomials = 16;
};

namespace detail {

/// Brent's cycle-finding variant of Pollard rho on x -> x^2 + c, x0 = 2,
/// batched gcd every 128 steps. Returns a non-trivial factor of composite
/// odd n, or 0 when the budget runs out for this c.
inline u64 brent_split(u64 n, u64 c, u64 budget) {
  constexpr u64 batch = 128;
  auto f = [&](u64 x) { return (mul_mod(x, x, n) + c) % n; };
  u64 y = 2, x = 2, ys = 2, q = 1, g = 1;
  u64 r = 1, spent = 0;
  while (g == 1) {
    x = y;
    for (u64 i = 0; i < r; ++i) y = f(y);
    u64 k = 0;
    while (k < r && g == 1) {
      ys = y;
      const u64 steps = std::min(batch, r - k);
      for (u64 i = 0; i < steps; ++i) {
        y = f(y);
        q = mul_mod(q, x > y ? x - y : y - x, n);
      }
      g = wseq::gcd(q, n);
      k += steps;
      spent += steps;
    }
    r <<= 1;
    if (spent > budget) return 0;
  }
  if (g == n) {
    // batch overshot; replay one step at a time
    do {
      ys = f(ys);
      g = wseq::gcd(x > ys ? x - ys : ys - x, n);
    } while (g == 1);
  }
  return g == n ? 0 : g;
}

inline void split_into(u64 n, std::vector<u64>& primes, const FactorOptions& opts) {
  if (n == 1) return;
  if (is_prime(n)) {
    primes.push_back(n);
    return;
  }
  for (u64 c = 1; c <= opts.max_polynomials; ++c) {
    const u64 d = brent_split(n, c, opts.rho_iterations);
    if (d != 0) {
      split_into(d, primes, opts);
      split_into(n / d, primes, opts);
      return;
    }
  }
  throw unresolved_error("factorization effort exceeded for " + std::to_string(n));
}

/// Strips prime factors <= 10^4 from n. Returns true when the remaining
/// cofactor is known to be 1 or prime (some trial prime exceeded its sqrt).
template <class UInt>
inline bool trial_divide(UInt& n, std::vector<PrimePower>& out) {
  for (u64 p64 : trial_primes()) {
    const UInt p = static_cast<UInt>(p64);
    if (p > n / p) return true;
    if (n % p != 0) continue;
    unsigned e = 0;
    do {
      n /= p;
      ++e;
    } while (n % p == 0);
    out.push_back({p64, e});
  }
  return n == 1;
}

} // namespace detail

/// Complete factorization: trial division by primes <= 10^4, then Brent's
/// rho on what is left.
inline Factorization factorize(u64 n, const FactorOptions& opts = {}) {
  if (n == 0) throw domain_error("factorize(0) is undefined");
  Factorization result;
  bool resolved;
  if (n <= std::numeric_limits<std::uint32_t>::max()) {
    auto small = static_cast<std::uint32_t>(n);
    resolved = detail::trial_divide(small, result.factors);
    n = small;
  } else {
    resolved = detail::trial_divide(n, result.factors);
  }
  if (n == 1) return result;
  if (resolved || is_prime(n)) {
    result.factors.push_back({n, 1});
    return result;
  }

  std::vector<u64> primes;
  detail::split_into(n, primes, opts);
  std::sort(primes.begin(), primes.end());
  for (u64 p : primes) {
    if (!result.factors.empty() && result.factors.back().prime == p)
      ++result.factors.back().exponent;
    else
      result.factors.push_back({p, 1});
  }
  return result;
}

/// Smallest prime factor of n >= 2.
inline u64 smallest_prime_factor(u64 n, const FactorOptions& opts = {}) {
  if (n < 2) throw domain_error("smallest_prime_factor needs n >= 2");
  for (u64 p : trial_primes()) {
    if (p > n / p) return n;
    if (n % p == 0) return p;
  }
  return factorize(n, opts).smallest_prime();
}

/// Smallest prime p < bound dividing n, or 0 if there is none.
inline u64 small_prime_divisor_below(u64 n, u64 bound) {
  for (u64 p : trial_primes()) {
    if (p >= bound) return 0;
    if (n % p == 0) return p;
  }
  for (u64 p = trial_primes().back() + 2; p < bound; p += 2)
    if (n % p == 0 && is_prime(p)) return p;
  return 0;
}

namespace detail {

inline BigNat brent_split_big(const BigNat& n, unsigned c, u64 budget) {
  constexpr u64 batch = 64;
  auto f = [&](const BigNat& x) { return BigNat((x * x + c) % n); };
  BigNat y = 2, x = 2, ys = 2, q = 1, g = 1;
  u64 r = 1, spent = 0;
  while (g == 1) {
    x = y;
    for (u64 i = 0; i < r; ++i) y = f(y);
    u64 k = 0;
    while (k < r && g == 1) {
      ys = y;
      const u64 steps = std::min(batch, r - k);
      for (u64 i = 0; i < steps; ++i) {
        y = f(y);
        q = q * (x > y ? BigNat(x - y) : BigNat(y - x)) % n;
      }
      g = boost::multiprecision::gcd(q, n);
      k += steps;
      spent += steps;
    }
    r <<= 1;
    if (spent > budget) return 0;
  }
  if (g == n) {
    do {
      ys = f(ys);
      g = boost::multiprecision::gcd(x > ys ? BigNat(x - ys) : BigNat(ys - x), n);
    } while (g == 1);
  }
  return g == n ? BigNat(0) : g;
}

} // namespace detail

/// Smallest prime factor of a big-tier n >= 2. Exact when every split is
/// found; primality of big cofactors follows is_probable_prime.
inline BigNat smallest_prime_factor(const BigNat& n, const FactorOptions& opts = {}) {
  if (n < 2) throw domain_error("smallest_prime_factor needs n >= 2");
  if (n <= std::numeric_limits<u64>::max()) return BigNat(smallest_prime_factor(static_cast<u64>(n), opts));
  for (u64 p : trial_primes())
    if (n % p == 0) return BigNat(p);
  if (is_probable_prime(n).prime) return n;
  for (unsigned c = 1; c <= opts.max_polynomials; ++c) {
    BigNat d = detail::brent_split_big(n, c, opts.rho_iterations);
    if (d != 0) {
      BigNat a = smallest_prime_factor(d, opts);
      BigNat b = smallest_prime_factor(BigNat(n / d), opts);
      return a < b ? a : b;
    }
  }
  throw unresolved_error("factorization effort exceeded for " + n.str());
}

// ---------------------------------------------------------------------------
// Fibonacci, F_1 = F_2 = 1

/// i-th Fibonacci number by fast doubling. i = 0 is rejected.
inline BigNat fib(u64 i) {
  if (i == 0) throw domain_error("fib: index must be >= 1 (F_1 = F_2 = 1)");
  // invariant: (a, b) = (F_k, F_{k+1})
  BigNat a = 0, b = 1;
  for (int bit = std::bit_width(i) - 1; bit >= 0; --bit) {
    BigNat c = a * (2 * b - a);
    BigNat d = a * a + b * b;
    if ((i >> bit) & 1) {
      a = d;
      b = c + d;
    } else {
      a = std::move(c);
      b = std::move(d);
    }
  }
  return a;
}

} // namespace wseq
