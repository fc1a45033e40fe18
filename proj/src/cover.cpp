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

#include "treeshred/cover.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace treeshred {
namespace {

class Solver {
 public:
  Solver(const WeightedCover& p, std::vector<std::size_t> sets,
         std::uint64_t budget)
      : p_(p), sets_(std::move(sets)), budget_(budget),
        excluded_(p.sets.size(), 0),
        covering_(p.num_elements) {
    for (std::size_t k : sets_) {
      for (auto e = p_.sets[k].find_first(); e != Bits::npos; e = p_.sets[k].find_next(e)) {
        covering_[e].push_back(k);
      }
    }
    for (auto& list : covering_) {
      std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) { return prefer(a, b); });
    }
  }

  bool prefer(std::size_t a, std::size_t b) const {
    return std::tie(p_.primary[a], p_.secondary[a], a) <
           std::tie(p_.primary[b], p_.secondary[b], b);
  }

  void greedy() {
    Bits uncovered(p_.num_elements);
    uncovered.set();
    std::vector<std::size_t> chosen;
    while (uncovered.any()) {
      std::size_t best = p_.sets.size();
      double best_ratio = -1;
      for (std::size_t k : sets_) {
        const auto c = (p_.sets[k] & uncovered).count();
        if (c == 0) continue;
        const double r = static_cast<double>(c) / static_cast<double>(p_.primary[k]);
        if (r > best_ratio || (r == best_ratio && prefer(k, best))) {
          best_ratio = r;
          best = k;
        }
      }
      chosen.push_back(best);
      uncovered -= p_.sets[best];
    }
    // Drop sets made redundant by later picks, most expensive first.
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) { return prefer(b, a); });
    for (std::size_t i = 0; i < chosen.size();) {
      Bits rest(p_.num_elements);
      for (std::size_t j = 0; j < chosen.size(); ++j) {
        if (j != i) rest |= p_.sets[chosen[j]];
      }
      if (rest.count() == p_.num_elements) {
        chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }
    offer(chosen);
  }

  void search() {
    Bits uncovered(p_.num_elements);
    uncovered.set();
    std::vector<std::size_t> chosen;
    recurse(uncovered, 0, 0, chosen);
  }

  CoverSolution result() const {
    CoverSolution s = best_;
    s.optimal = !aborted_;
    s.nodes = nodes_;
    return s;
  }

 private:
  void offer(std::vector<std::size_t> chosen) {
    std::sort(chosen.begin(), chosen.end());
    std::uint64_t pw = 0, sw = 0;
    for (std::size_t k : chosen) {
      pw += p_.primary[k];
      sw += p_.secondary[k];
    }
    if (!have_best_ || std::tie(pw, sw, chosen) <
                           std::tie(best_.primary, best_.secondary, best_.chosen)) {
      best_.chosen = std::move(chosen);
      best_.primary = pw;
      best_.secondary = sw;
      have_best_ = true;
    }
  }

  void recurse(const Bits& uncovered, std::uint64_t pw, std::uint64_t sw,
               std::vector<std::size_t>& chosen) {
    if (aborted_) return;
    if (++nodes_ > budget_) {
      aborted_ = true;
      return;
    }
    if (uncovered.none()) {
      offer(chosen);
      return;
    }
    // Pick the uncovered element with the fewest usable sets; its cheapest
    // usable set also bounds the remaining cost from below.
    std::size_t pick = Bits::npos;
    std::size_t pick_count = 0;
    std::uint64_t lb_single = 0;
    for (auto e = uncovered.find_first(); e != Bits::npos; e = uncovered.find_next(e)) {
      std::size_t count = 0;
      std::uint64_t cheapest = 0;
      for (std::size_t k : covering_[e]) {
        if (excluded_[k]) continue;
        if (count == 0) cheapest = p_.primary[k];
        ++count;
      }
      if (count == 0) return;
      lb_single = std::max(lb_single, cheapest);
      if (pick == Bits::npos || count < pick_count) {
        pick = e;
        pick_count = count;
      }
    }
    double best_ratio = 0;
    for (std::size_t k : sets_) {
      if (excluded_[k]) continue;
      const auto c = (p_.sets[k] & uncovered).count();
      best_ratio = std::max(best_ratio, static_cast<double>(c) /
                                            static_cast<double>(p_.primary[k]));
    }
    const auto lb_ratio = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(uncovered.count()) / best_ratio - 1e-9));
    const std::uint64_t lb = std::max(lb_single, lb_ratio);
    if (have_best_) {
      if (pw + lb > best_.primary) return;
      if (pw + lb == best_.primary && sw > best_.secondary) return;
    }

    std::vector<std::size_t> tried;
    for (std::size_t k : covering_[pick]) {
      if (excluded_[k]) continue;
      chosen.push_back(k);
      recurse(uncovered - p_.sets[k], pw + p_.primary[k], sw + p_.secondary[k], chosen);
      chosen.pop_back();
      excluded_[k] = 1;
      tried.push_back(k);
      if (aborted_) break;
    }
    for (std::size_t k : tried) excluded_[k] = 0;
  }

  const WeightedCover& p_;
  std::vector<std::size_t> sets_;
  std::uint64_t budget_;
  std::vector<char> excluded_;
  std::vector<std::vector<std::size_t>> covering_;
  CoverSolution best_;
  bool have_best_ = false;
  bool aborted_ = false;
  std::uint64_t nodes_ = 0;
};

// Removes empty, duplicate and dominated sets. A set is dropped only when a
// kept set covers a superset at no greater cost and either costs strictly
// less or has a smaller index, so the lexicographic optimum is unchanged.
std::vector<std::size_t> reduce(const WeightedCover& p) {
  std::vector<std::size_t> order(p.sets.size());
  std::iota(order.begin(), order.end(), 0);
  order.erase(std::remove_if(order.begin(), order.end(),
                             [&](std::size_t k) { return p.sets[k].none(); }),
              order.end());
  auto better_or_equal = [&](std::size_t b, std::size_t a) {
    if (p.primary[b] > p.primary[a] || p.secondary[b] > p.secondary[a]) return false;
    if (p.primary[b] < p.primary[a] || p.secondary[b] < p.secondary[a]) return true;
    return b < a;
  };
  const std::size_t words = (p.num_elements + 63) / 64;
  const bool full_dominance =
      static_cast<double>(order.size()) * static_cast<double>(order.size()) *
          static_cast<double>(words) <= 4e8;
  std::vector<char> dropped(p.sets.size(), 0);
  if (full_dominance) {
    for (std::size_t a : order) {
      for (std::size_t b : order) {
        if (a == b || dropped[b]) continue;
        if (better_or_equal(b, a) && p.sets[a].is_subset_of(p.sets[b])) {
          dropped[a] = 1;
          break;
        }
      }
    }
  } else {
    // Duplicates only.
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
      if (p.sets[a] != p.sets[b]) return p.sets[a] < p.sets[b];
      return better_or_equal(a, b);
    });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (p.sets[sorted[i]] == p.sets[sorted[i - 1]]) dropped[sorted[i]] = 1;
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t k : order) {
    if (!dropped[k]) kept.push_back(k);
  }
  return kept;
}

}  // namespace

std::optional<CoverSolution> solve_cover(const WeightedCover& problem,
                                         std::uint64_t node_budget) {
  if (problem.num_elements == 0) return CoverSolution{};
  Bits all(problem.num_elements);
  for (const auto& s : problem.sets) all |= s;
  if (all.count() != problem.num_elements) return std::nullopt;
  Solver solver(problem, reduce(problem), node_budget);
  solver.greedy();
  solver.search();
  return solver.result();
}

}  // namespace treeshred
