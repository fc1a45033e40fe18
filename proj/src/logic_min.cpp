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

#include "treeshred/logic_min.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "treeshred/cover.hpp"

namespace treeshred {
namespace {

void check_width(const TruthTable& t) {
  if (t.num_vars > 63) throw std::invalid_argument("truth table wider than 63 variables");
}

std::vector<std::uint64_t> distinct(std::vector<std::uint64_t> rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

std::vector<Cube> keep_useful(std::vector<Cube> primes, const TruthTable& t) {
  std::erase_if(primes, [&](const Cube& c) {
    return std::none_of(t.positives.begin(), t.positives.end(),
                        [&](std::uint64_t r) { return c.contains(r); });
  });
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  return primes;
}

}  // namespace

std::size_t Cube::literals() const { return static_cast<std::size_t>(std::popcount(care)); }

std::size_t Dnf::literals() const {
  std::size_t n = 0;
  for (const auto& c : terms) n += c.literals();
  return n;
}

bool Dnf::eval(std::uint64_t row) const {
  return std::any_of(terms.begin(), terms.end(),
                     [&](const Cube& c) { return c.contains(row); });
}

bool consistent(const TruthTable& table) {
  auto pos = distinct(table.positives);
  for (auto r : table.negatives) {
    if (std::binary_search(pos.begin(), pos.end(), r)) return false;
  }
  return true;
}

std::vector<Cube> prime_implicants_qm(const TruthTable& table) {
  check_width(table);
  if (table.num_vars > 16) throw std::invalid_argument("QM limited to 16 variables");
  const std::size_t n = table.num_vars;
  const std::uint64_t full = n == 0 ? 0 : ((std::uint64_t{1} << n) - 1);
  std::unordered_set<std::uint64_t> off(table.negatives.begin(), table.negatives.end());

  // Cubes packed as care << 32 | value.
  auto pack = [](std::uint64_t care, std::uint64_t value) { return (care << 32) | value; };
  std::unordered_set<std::uint64_t> level;
  for (std::uint64_t m = 0; m <= full; ++m) {
    if (!off.contains(m)) level.insert(pack(full, m));
  }
  std::vector<Cube> primes;
  while (!level.empty()) {
    std::unordered_set<std::uint64_t> next;
    std::unordered_set<std::uint64_t> merged;
    for (std::uint64_t key : level) {
      const std::uint64_t care = key >> 32;
      const std::uint64_t value = key & 0xffffffffu;
      for (std::uint64_t bits = care; bits != 0; bits &= bits - 1) {
        const std::uint64_t b = bits & (~bits + 1);
        const std::uint64_t partner = pack(care, value ^ b);
        if (!level.contains(partner)) continue;
        merged.insert(key);
        merged.insert(partner);
        next.insert(pack(care & ~b, value & ~b));
      }
    }
    for (std::uint64_t key : level) {
      if (!merged.contains(key)) primes.push_back({key >> 32, key & 0xffffffffu});
    }
    level = std::move(next);
  }
  return keep_useful(std::move(primes), table);
}

std::vector<Cube> prime_implicants_hitting(const TruthTable& table) {
  check_width(table);
  const auto pos = distinct(table.positives);
  const auto neg = distinct(table.negatives);
  std::set<Cube> primes;
  for (std::uint64_t m : pos) {
    // A cube through m avoids negative o iff it keeps a variable where m and
    // o differ; primes through m are the minimal hitting sets of these.
    std::vector<std::uint64_t> diffs;
    for (std::uint64_t o : neg) diffs.push_back(m ^ o);
    std::sort(diffs.begin(), diffs.end());
    diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
    std::set<std::uint64_t> found;
    auto rec = [&](auto&& self, std::uint64_t chosen) -> void {
      auto it = std::find_if(diffs.begin(), diffs.end(),
                             [&](std::uint64_t d) { return (d & chosen) == 0; });
      if (it == diffs.end()) {
        // Minimal iff every chosen variable is the only one hitting some set.
        for (std::uint64_t bits = chosen; bits != 0; bits &= bits - 1) {
          const std::uint64_t b = bits & (~bits + 1);
          const bool needed = std::any_of(diffs.begin(), diffs.end(), [&](std::uint64_t d) {
            return (d & chosen) == b;
          });
          if (!needed) return;
        }
        found.insert(chosen);
        return;
      }
      for (std::uint64_t bits = *it; bits != 0; bits &= bits - 1) {
        const std::uint64_t b = bits & (~bits + 1);
        self(self, chosen | b);
      }
    };
    rec(rec, 0);
    for (std::uint64_t s : found) primes.insert(Cube{s, m & s});
  }
  return keep_useful({primes.begin(), primes.end()}, table);
}

std::vector<Cube> prime_implicants(const TruthTable& table) {
  return table.num_vars <= 12 ? prime_implicants_qm(table)
                              : prime_implicants_hitting(table);
}

std::optional<Dnf> minimize_dnf(const TruthTable& table) {
  check_width(table);
  if (!consistent(table)) return std::nullopt;
  const auto pos = distinct(table.positives);
  if (pos.empty()) return Dnf{};
  if (table.negatives.empty()) return Dnf{{Cube{}}};
  const auto primes = prime_implicants(table);
  WeightedCover cover;
  cover.num_elements = pos.size();
  for (const Cube& c : primes) {
    Bits s(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (c.contains(pos[i])) s.set(i);
    }
    cover.sets.push_back(std::move(s));
    cover.primary.push_back(c.literals());
    cover.secondary.push_back(1);
  }
  auto sol = solve_cover(cover);
  if (!sol) throw std::logic_error("prime implicants fail to cover the positives");
  Dnf dnf;
  for (std::size_t k : sol->chosen) dnf.terms.push_back(primes[k]);
  std::sort(dnf.terms.begin(), dnf.terms.end(), [](const Cube& a, const Cube& b) {
    if (a.literals() != b.literals()) return a.literals() < b.literals();
    return a < b;
  });
  return dnf;
}

Predicate dnf_to_predicate(const Dnf& dnf, std::span<const Predicate> atoms) {
  std::vector<Predicate> terms;
  for (const Cube& c : dnf.terms) {
    std::vector<Predicate> lits;
    for (std::size_t v = 0; v < atoms.size(); ++v) {
      const std::uint64_t b = std::uint64_t{1} << v;
      if (!(c.care & b)) continue;
      lits.push_back((c.value & b) ? atoms[v] : Predicate::negate(atoms[v]));
    }
    terms.push_back(lits.size() == 1 ? std::move(lits[0])
                                     : Predicate::all_of(std::move(lits)));
  }
  if (terms.size() == 1) return std::move(terms[0]);
  return Predicate::any_of(std::move(terms));
}

std::string to_string(const Dnf& dnf) {
  if (dnf.terms.empty()) return "false";
  std::string out;
  for (std::size_t t = 0; t < dnf.terms.size(); ++t) {
    if (t > 0) out += " | ";
    const Cube& c = dnf.terms[t];
    if (c.care == 0) {
      out += "true";
      continue;
    }
    bool first = true;
    for (std::size_t v = 0; v < 64; ++v) {
      const std::uint64_t b = std::uint64_t{1} << v;
      if (!(c.care & b)) continue;
      if (!first) out += " & ";
      first = false;
      if (!(c.value & b)) out += '!';
      out += 'x' + std::to_string(v);
    }
  }
  return out;
}

}  // namespace treeshred
