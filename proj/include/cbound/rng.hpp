// Copyright 2026 The cbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iterator>
#include <random>
#include <utility>

namespace cbound {

// Advances a SplitMix64 state and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

// Seed of an independent child stream; a pure function of its arguments.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Seeded 64-bit generator. Distributions are implemented here rather than
// taken from <random> so that sequences are identical across standard
// library implementations (std::mt19937_64 itself is fully specified).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();

  // Standard normal (Box-Muller, spare value cached).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  // Child generator for stream `index`; does not advance *this.
  Rng split(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

  std::uint64_t seed() const noexcept { return seed_; }

  template <typename It>
  void shuffle(It first, It last) {
    auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      auto j = below(i);
      using std::swap;
      swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cbound
