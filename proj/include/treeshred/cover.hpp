// Copyright 2026 The treeshred Authors
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

#ifndef TREESHRED_COVER_HPP_
#define TREESHRED_COVER_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace treeshred {

using Bits = boost::dynamic_bitset<std::uint64_t>;

// Exact set cover: choose sets covering every element, minimizing
// (sum of primary weights, sum of secondary weights, sorted index list)
// lexicographically. Primary weights must be positive.
struct WeightedCover {
  std::size_t num_elements = 0;
  std::vector<Bits> sets;                  // each of size num_elements
  std::vector<std::uint64_t> primary;      // one per set
  std::vector<std::uint64_t> secondary;    // one per set
};

struct CoverSolution {
  std::vector<std::size_t> chosen;  // sorted set indices
  std::uint64_t primary = 0;
  std::uint64_t secondary = 0;
  bool optimal = true;              // false when the node budget ran out
  std::uint64_t nodes = 0;          // branch-and-bound nodes explored
};

// Branch and bound with a greedy incumbent, duplicate and dominated set
// removal, and a ratio lower bound. Returns nullopt when some element is
// covered by no set.
std::optional<CoverSolution> solve_cover(const WeightedCover& problem,
                                         std::uint64_t node_budget = 20'000'000);

}  // namespace treeshred

#endif  // TREESHRED_COVER_HPP_
