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

#include "stablab/seeding.hpp"

#include <algorithm>
#include <numeric>

namespace stablab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag,
                          std::uint64_t index) {
  return mix64(mix64(mix64(parent) ^ tag) + index);
}

std::uint64_t IndexStream::below(std::uint64_t a, std::uint64_t b,
                                 std::uint64_t bound) const {
  // Lemire's multiply-shift with rejection; retries move along a third
  // counter so the draw stays a pure function of (seed, a, b).
  const std::uint64_t threshold = (0 - bound) % bound;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t r =
        mix64(mix64(mix64(seed_ ^ a) + b) + attempt * 0xD1B54A32D192ED03ULL);
    const unsigned __int128 m =
        static_cast<unsigned __int128>(r) * static_cast<unsigned __int128>(bound);
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

std::size_t IndexStream::uniform(std::uint64_t t, std::size_t n) const {
  return static_cast<std::size_t>(below(t, 0, n));
}

std::vector<std::size_t> IndexStream::permutation(std::uint64_t epoch,
                                                  std::size_t n) const {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const std::uint64_t key = ~epoch;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(below(key, i, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::size_t> sample_without_replacement(std::uint64_t seed,
                                                    std::size_t n,
                                                    std::size_t m) {
  IndexStream stream(seed);
  auto perm = stream.permutation(0, n);
  perm.resize(std::min(m, n));
  std::sort(perm.begin(), perm.end());
  return perm;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace stablab
