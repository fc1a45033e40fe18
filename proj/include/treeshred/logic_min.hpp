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

#ifndef TREESHRED_LOGIC_MIN_HPP_
#define TREESHRED_LOGIC_MIN_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeshred/dsl.hpp"

namespace treeshred {

// Partial truth table over at most 63 boolean variables. A row is a bitmask
// whose bit v holds variable v; rows listed in neither set are don't-cares.
struct TruthTable {
  std::size_t num_vars = 0;
  std::vector<std::uint64_t> positives;
  std::vector<std::uint64_t> negatives;
};

// Product term: variable v appears iff bit v of `care` is set, negated iff
// bit v of `value` is clear.
struct Cube {
  std::uint64_t care = 0;
  std::uint64_t value = 0;

  bool contains(std::uint64_t row) const { return (row & care) == value; }
  std::size_t literals() const;
  friend auto operator<=>(const Cube&, const Cube&) = default;
};

struct Dnf {
  std::vector<Cube> terms;  // no terms: false; one empty term: true

  std::size_t literals() const;
  bool eval(std::uint64_t row) const;
};

bool consistent(const TruthTable& table);

// Prime implicants of the function that is 1 on the positives, 0 on the
// negatives and free elsewhere, restricted to primes covering a positive.
// Sorted. The QM variant needs num_vars <= 16.
std::vector<Cube> prime_implicants_qm(const TruthTable& table);
std::vector<Cube> prime_implicants_hitting(const TruthTable& table);
std::vector<Cube> prime_implicants(const TruthTable& table);

// Classifier with the fewest literals (then fewest terms) among DNFs over the
// table's variables. nullopt when the table labels a row both ways.
std::optional<Dnf> minimize_dnf(const TruthTable& table);

// Builds a predicate from a DNF whose variable v stands for atoms[v]. Single
// literals and single terms are not wrapped.
Predicate dnf_to_predicate(const Dnf& dnf, std::span<const Predicate> atoms);

std::string to_string(const Dnf& dnf);

}  // namespace treeshred

#endif  // TREESHRED_LOGIC_MIN_HPP_
