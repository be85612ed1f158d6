#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gpk {

/// Largest m = n accepted by the invariant suite; it builds dense bases.
inline constexpr std::size_t kCheckMaxSize = 1000;

struct CheckOptions {
  std::size_t size = 12;  // m = n
  std::uint64_t seed = 7;
  std::size_t systems = 3;  // seeds seed, seed + 1, ...
  std::size_t max_steps = 8;
  // Use a shadow vector f orthogonal to b so the reduction cannot start.
  bool force_breakdown = false;
};

struct InvariantResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;  // worst value seen
  double threshold = 0.0;
  std::string note;
};

struct CheckReport {
  std::vector<InvariantResult> results;
  bool passed() const;
  /// Name of the first failing invariant, empty when all pass.
  std::string first_failure() const;
};

/// Runs the reduction, factorization, oracle and estimate invariants on
/// seeded random systems. Throws SizeGuardError when size > kCheckMaxSize.
CheckReport run_invariant_suite(const CheckOptions& opts = {});

void print_check_table(const CheckReport& report, std::ostream& out);

}  // namespace gpk
