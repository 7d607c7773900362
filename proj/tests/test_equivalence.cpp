// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>

#include "cosformer/equivalence.hpp"

using namespace cosformer;

namespace {

EquivalenceOptions small(Mutation mutation = Mutation::none) {
  EquivalenceOptions o;
  o.seed = 17;
  o.trials = 40;
  o.max_len = 32;
  o.max_streaming_len = 48;
  o.mutation = mutation;
  return o;
}

}  // namespace

TEST(Equivalence, SingleTrialIsDeterministic) {
  EquivalenceOptions o = small();
  o.trials = 1;
  const auto a = run_equivalence_suite(o);
  const auto b = run_equivalence_suite(o);
  ASSERT_EQ(a.variants.size(), b.variants.size());
  for (std::size_t i = 0; i < a.variants.size(); ++i) {
    EXPECT_EQ(a.variants[i].max_error, b.variants[i].max_error);
    EXPECT_EQ(a.variants[i].name, b.variants[i].name);
  }
}

TEST(Equivalence, CleanKernelPasses) {
  const auto report = run_equivalence_suite(small());
  EXPECT_TRUE(report.passed());
  std::ostringstream out;
  print_report(report, out);
  EXPECT_NE(out.str().find("cosformer/wide"), std::string::npos);
}

TEST(Equivalence, ThreadCountDoesNotChangeResults) {
  EquivalenceOptions o = small();
  const auto serial = run_equivalence_suite(o);
  o.threads = 3;
  const auto parallel = run_equivalence_suite(o);
  for (std::size_t i = 0; i < serial.variants.size(); ++i) {
    EXPECT_EQ(serial.variants[i].max_error, parallel.variants[i].max_error);
  }
}

TEST(Equivalence, EachMutationIsCaught) {
  for (Mutation m : {Mutation::position_off_by_one, Mutation::drop_sin_branch, Mutation::no_denominator_floor}) {
    EXPECT_FALSE(run_equivalence_suite(small(m)).passed()) << to_string(m);
  }
}

TEST(Equivalence, PrecisionSelectsVariants) {
  EquivalenceOptions o = small();
  o.precision = Precision::standard;
  const auto report = run_equivalence_suite(o);
  EXPECT_NE(report.find("cosformer/standard"), nullptr);
  EXPECT_EQ(report.find("cosformer/wide"), nullptr);
}

TEST(Equivalence, CsvHeader) {
  std::ostringstream out;
  write_report_csv(run_equivalence_suite(small()), out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "variant,trials,failures,max_rel_err,tolerance,passed");
}

TEST(Equivalence, ParsesNames) {
  EXPECT_EQ(parse_mutation("drop-sin"), Mutation::drop_sin_branch);
  EXPECT_EQ(parse_precision("wide"), Precision::wide);
  EXPECT_THROW(parse_mutation("typo"), UsageError);
  EXPECT_THROW(parse_precision("long"), UsageError);
}
