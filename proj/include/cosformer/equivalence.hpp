// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_EQUIVALENCE_HPP_
#define COSFORMER_EQUIVALENCE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cosformer/types.hpp"

namespace cosformer {

enum class Precision { standard, wide, both };

/// Known bugs that can be injected into the cosFormer kernel to confirm the
/// suite notices them.
enum class Mutation {
  none,
  position_off_by_one,  // query positions shifted by one
  drop_sin_branch,      // only the cos half of the decomposition is used
  no_denominator_floor  // raw denominator, so all-zero feature rows divide by zero
};

Mutation parse_mutation(const std::string& name);
std::string to_string(Mutation m);
Precision parse_precision(const std::string& name);

struct EquivalenceOptions {
  std::uint64_t seed = 0;
  Index trials = 1000;
  Precision precision = Precision::both;
  Mutation mutation = Mutation::none;
  Index max_len = 128;
  Index max_dim = 32;
  Index max_streaming_len = 256;
  unsigned threads = 1;  // > 1 runs trials in parallel; results do not depend on it
};

struct VariantResult {
  std::string name;
  double tolerance = 0.0;
  double max_error = 0.0;
  Index trials = 0;
  Index failures = 0;

  bool passed() const { return failures == 0; }
};

struct EquivalenceReport {
  std::uint64_t seed = 0;
  Index trials = 0;
  std::vector<VariantResult> variants;

  bool passed() const;
  const VariantResult* find(const std::string& name) const;
};

/// Samples random shapes and configs and compares each linear-cost operation
/// against its quadratic oracle. Deterministic in (seed, trials).
EquivalenceReport run_equivalence_suite(const EquivalenceOptions& options);

void print_report(const EquivalenceReport& report, std::ostream& out);
void write_report_csv(const EquivalenceReport& report, std::ostream& out);

}  // namespace cosformer

#endif  // COSFORMER_EQUIVALENCE_HPP_
