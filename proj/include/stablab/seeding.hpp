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

#ifndef STABLAB_SEEDING_HPP_
#define STABLAB_SEEDING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stablab {

// SplitMix64 finalizer. Used as the mixing function of every counter-based
// stream in the library.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent child seed from (parent, tag, index). Tags keep the
// streams of different roles (base sample, ghost sample, index sequence...)
// apart even when they share the same replicate index.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag,
                          std::uint64_t index = 0);

namespace seed_tag {
inline constexpr std::uint64_t kBaseSample = 0x5A17;
inline constexpr std::uint64_t kGhostSample = 0x6405;
inline constexpr std::uint64_t kIndexStream = 0x1D5E;
inline constexpr std::uint64_t kNeighborPick = 0x9E16;
inline constexpr std::uint64_t kPopulation = 0x909C;
inline constexpr std::uint64_t kReplicate = 0x7E91;
inline constexpr std::uint64_t kProperty = 0x960F;
}  // namespace seed_tag

// Counter-based index stream: the t-th draw is a pure function of
// (seed, t), so coupled trajectories that share the seed see the same
// sequence no matter what else they record.
class IndexStream {
 public:
  explicit IndexStream(std::uint64_t seed) : seed_(seed) {}

  // Uniform draw from {0, ..., n-1} for step t (t counts from 1).
  std::size_t uniform(std::uint64_t t, std::size_t n) const;

  // Uniform permutation of {0, ..., n-1} for epoch k (Fisher-Yates).
  std::vector<std::size_t> permutation(std::uint64_t epoch,
                                       std::size_t n) const;

  std::uint64_t seed() const { return seed_; }

 private:
  // Unbiased draw below `bound` using the counter pair (a, b).
  std::uint64_t below(std::uint64_t a, std::uint64_t b,
                      std::uint64_t bound) const;

  std::uint64_t seed_;
};

// Uniform sample of m distinct indices from {0, ..., n-1}, sorted.
std::vector<std::size_t> sample_without_replacement(std::uint64_t seed,
                                                    std::size_t n,
                                                    std::size_t m);

// Pairwise summation with a fixed split order; results do not depend on how
// the values were produced, only on their order.
double pairwise_sum(std::span<const double> values);

}  // namespace stablab

#endif  // STABLAB_SEEDING_HPP_
