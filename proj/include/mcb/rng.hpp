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

#ifndef MCB_RNG_HPP_
#define MCB_RNG_HPP_

#include <cstdint>
#include <limits>

namespace mcb {

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based random stream. Draw k of a stream is mix64(key + (k+1)*gamma),
// so any draw is addressable without replaying the prefix, and a stream is
// fully determined by its key. Children are keyed by (parent key, index);
// simulations key one child per trajectory, which makes results independent
// of how trajectories are scheduled across threads.
class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr Stream() = default;
  constexpr explicit Stream(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  constexpr Stream child(std::uint64_t index) const {
    Stream s;
    s.key_ = mix64(key_ ^ mix64(index + 0x3c6ef372fe94f82bULL));
    return s;
  }

  constexpr std::uint64_t at(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * kGamma);
  }

  constexpr std::uint64_t operator()() { return at(counter_++); }
  constexpr std::uint64_t counter() const { return counter_; }
  constexpr std::uint64_t key() const { return key_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; the bias is < n / 2^64 and irrelevant here.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace mcb

#endif  // MCB_RNG_HPP_
