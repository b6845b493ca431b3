#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wseq {

/// Argument outside an operation's domain (zero where a positive value is
/// required, malformed sequence, invalid family parameters).
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Machine-tier arithmetic would wrap. Never silently promoted.
class overflow_error : public std::overflow_error {
public:
  using std::overflow_error::overflow_error;
};

/// Factorization gave up within its effort budget. `index` names the
/// offending sequence element when the failure happened inside a sequence
/// check, and is npos otherwise.
class unresolved_error : public std::runtime_error {
public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit unresolved_error(const std::string& what, std::size_t index = npos)
      : std::runtime_error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// Two independent computation paths disagreed. Always a bug or a
/// mathematical surprise; never swallowed.
class consistency_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace wseq
