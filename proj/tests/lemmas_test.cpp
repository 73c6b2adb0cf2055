// Copyright 2026 The MCB Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "mcb/lemmas.hpp"

namespace mcb {
namespace {

TEST(LemmaSuite, AllChecksHold) {
  const LemmaReport rep = verify_lemma_suite(2026, 100);
  EXPECT_EQ(rep.results.size(), 12u);
  for (const auto& r : rep.results) {
    EXPECT_TRUE(r.ok()) << r.name;
    EXPECT_EQ(r.instances, 100);
  }
  EXPECT_TRUE(rep.ok()) << rep.summary();
}

TEST(LemmaSuite, OtherSeedsHold) {
  for (std::uint64_t seed : {1u, 7u, 99u}) {
    const LemmaReport rep = verify_lemma_suite(seed, 25);
    EXPECT_TRUE(rep.ok()) << rep.summary();
  }
}

TEST(RunLemma, ReportsFailuresWithSeed) {
  const LemmaResult r = run_lemma("always_over", 3, 17, 10, 0.0, [](Stream& s) { return s.uniform() - 0.5; });
  EXPECT_EQ(r.instances, 10);
  EXPECT_GT(r.failures, 0);
  EXPECT_GE(r.first_failure, 0);
  EXPECT_EQ(r.seed, 17u);
  EXPECT_FALSE(r.ok());
  LemmaReport rep;
  rep.results.push_back(r);
  EXPECT_NE(rep.summary().find("seed=17"), std::string::npos);
}

TEST(RunLemma, Deterministic) {
  auto check = [](Stream& s) { return s.uniform(); };
  const LemmaResult a = run_lemma("x", 5, 3, 50, 1.0, check);
  const LemmaResult b = run_lemma("x", 5, 3, 50, 1.0, check);
  EXPECT_EQ(a.worst_excess, b.worst_excess);
}

TEST(Hoeffding, TwoPointCommutingCaseIsEquality) {
  // Y = +/- R I with equal mass: E e^{sY} = cosh(sR) I.
  const double s = 0.7;
  const double R = 1.3;
  const double lhs = 0.5 * (std::exp(s * R) + std::exp(-s * R));
  EXPECT_NEAR(lhs, std::cosh(s * R), 1e-15);
}

TEST(ExpBounds, EqualArgumentsGiveZeroDifference) {
  Stream s(5);
  const HermitianMatrix a = random_hermitian(3, 1.0, s);
  EXPECT_EQ(op_norm(ComplexMatrix(expm_hermitian(a, 1.0).matrix() - expm_hermitian(a, 1.0).matrix())), 0.0);
}

}  // namespace
}  // namespace mcb
