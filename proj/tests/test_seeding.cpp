/* Copyright 2026 The stablab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "stablab/seeding.hpp"

using namespace stablab;

TEST_CASE("derived seeds are deterministic and separate streams") {
  CHECK(derive_seed(1, seed_tag::kReplicate, 3) == derive_seed(1, seed_tag::kReplicate, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t parent : {0ULL, 1ULL, 2ULL}) {
    for (std::uint64_t tag : {seed_tag::kBaseSample, seed_tag::kGhostSample,
                              seed_tag::kIndexStream, seed_tag::kReplicate}) {
      for (std::uint64_t i = 0; i < 16; ++i) seen.insert(derive_seed(parent, tag, i));
    }
  }
  CHECK(seen.size() == 3 * 4 * 16);
}

TEST_CASE("index stream draws depend only on the step counter") {
  IndexStream a(42);
  IndexStream b(42);
  std::vector<std::size_t> forward;
  for (std::uint64_t t = 1; t <= 100; ++t) forward.push_back(a.uniform(t, 7));
  for (std::uint64_t t = 100; t >= 1; --t) CHECK(b.uniform(t, 7) == forward[t - 1]);
}

TEST_CASE("index stream is roughly uniform") {
  IndexStream s(7);
  const std::size_t n = 10;
  const std::size_t draws = 100000;
  std::vector<double> counts(n, 0.0);
  for (std::uint64_t t = 1; t <= draws; ++t) {
    const std::size_t k = s.uniform(t, n);
    REQUIRE(k < n);
    counts[k] += 1.0;
  }
  double chi2 = 0.0;
  const double expect = static_cast<double>(draws) / static_cast<double>(n);
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 9 degrees of freedom; 0.999 quantile is about 27.9.
  CHECK(chi2 < 27.9);
}

TEST_CASE("permutations are valid and vary across epochs") {
  IndexStream s(3);
  const auto p0 = s.permutation(0, 20);
  const auto p1 = s.permutation(1, 20);
  auto sorted = p0;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 20; ++i) CHECK(sorted[i] == i);
  CHECK(p0 != p1);
  CHECK(s.permutation(0, 20) == p0);
  CHECK(s.permutation(5, 1) == std::vector<std::size_t>{0});
  CHECK(s.permutation(5, 0).empty());
}

TEST_CASE("both orders of a two-element permutation occur") {
  IndexStream s(11);
  int identity = 0;
  for (std::uint64_t e = 0; e < 2000; ++e) identity += s.permutation(e, 2)[0] == 0;
  CHECK(identity > 900);
  CHECK(identity < 1100);
}

TEST_CASE("sampling without replacement") {
  const auto idx = sample_without_replacement(9, 50, 10);
  REQUIRE(idx.size() == 10);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
  CHECK(idx.back() < 50);
  CHECK(sample_without_replacement(9, 5, 99).size() == 5);
}

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{1.0, 2.0, 3.0}) == 6.0);
}
