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

#include "treeshred/synthesizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace treeshred {

Cost cost(const Program& program) {
  return Cost{atom_count(program.predicate), program.extractor.constructs(),
              to_string(program)};
}

bool verify(const Program& program, std::span<const Example> examples) {
  for (const Example& ex : examples) {
    if (!same_rows(eval_program(program, *ex.tree), ex.table)) return false;
  }
  return true;
}

namespace {

using Clock = std::chrono::steady_clock;

void validate(std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("no examples");
  const std::size_t k = examples[0].table.width;
  if (k == 0) throw std::invalid_argument("example tables have no columns");
  for (std::size_t e = 0; e < examples.size(); ++e) {
    const Example& ex = examples[e];
    if (ex.tree == nullptr) throw std::invalid_argument("example without a tree");
    if (ex.table.width != k) {
      throw std::invalid_argument("example " + std::to_string(e + 1) + " has " +
                                  std::to_string(ex.table.width) + " columns, expected " +
                                  std::to_string(k));
    }
    if (ex.table.rows.empty()) {
      throw std::invalid_argument("example " + std::to_string(e + 1) + " has no rows");
    }
    for (const auto& row : ex.table.rows) {
      if (row.size() != k) throw std::invalid_argument("ragged example table");
    }
  }
}

// Index vectors into the per-column extractor lists, cheapest total first.
std::vector<std::vector<std::size_t>> candidate_order(
    const std::vector<std::vector<ColumnExtractor>>& lists, std::size_t limit) {
  using Entry = std::pair<std::size_t, std::vector<std::size_t>>;
  auto weight = [&](const std::vector<std::size_t>& idx) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) w += lists[i][idx[i]].constructs();
    return w;
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> start(lists.size(), 0);
  frontier.push({weight(start), start});
  seen.insert(start);
  std::vector<std::vector<std::size_t>> out;
  while (!frontier.empty() && out.size() < limit) {
    auto [w, idx] = frontier.top();
    frontier.pop();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] + 1 >= lists[i].size()) continue;
      auto next = idx;
      ++next[i];
      if (seen.insert(next).second) frontier.push({weight(next), next});
    }
    out.push_back(std::move(idx));
  }
  return out;
}

}  // namespace

ColumnSpace learn_columns(std::span<const Example> examples, const SynthConfig& config) {
  validate(examples);
  ColumnSpace space;
  const std::size_t k = examples[0].table.width;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<ColumnExample> col;
    for (const Example& ex : examples) {
      ColumnExample ce{ex.tree, {}};
      for (const auto& row : ex.table.rows) ce.values.push_back(row[i]);
      col.push_back(std::move(ce));
    }
    space.dfas.push_back(learn_column_dfa(col, config.coverage, config.max_dfa_states));
    space.extractors.push_back(
        representatives(space.dfas.back(), config.max_programs, config.max_len));
  }
  return space;
}

std::optional<Program> synthesize(std::span<const Example> examples,
                                  const SynthConfig& config, SynthReport* report) {
  SynthReport local;
  SynthReport& rep = report ? *report : local;
  rep = SynthReport{};
  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<double>(config.budget_secs));
  auto finish = [&](std::optional<Program> result) {
    rep.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return result;
  };

  try {
    validate(examples);
  } catch (const std::invalid_argument& e) {
    rep.failure = SynthFailure::kInvalidInput;
    rep.message = e.what();
    return finish(std::nullopt);
  }

  ColumnSpace space;
  const std::size_t k = examples[0].table.width;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<ColumnExample> col;
    for (const Example& ex : examples) {
      ColumnExample ce{ex.tree, {}};
      for (const auto& row : ex.table.rows) ce.values.push_back(row[i]);
      col.push_back(std::move(ce));
    }
    try {
      space.dfas.push_back(learn_column_dfa(col, config.coverage, config.max_dfa_states));
    } catch (const std::length_error& e) {
      rep.failure = SynthFailure::kColumn;
      rep.failed_column = i;
      rep.message = "column " + std::to_string(i + 1) + ": " + e.what();
      return finish(std::nullopt);
    }
    space.extractors.push_back(
        representatives(space.dfas.back(), config.max_programs, config.max_len));
    rep.columns.push_back({space.dfas.back().num_states(), space.extractors.back().size()});
    if (space.extractors.back().empty()) {
      rep.failure = SynthFailure::kColumn;
      rep.failed_column = i;
      rep.message = "column " + std::to_string(i + 1) +
                    ": no extractor selects nodes covering the example values";
      return finish(std::nullopt);
    }
  }

  const auto order = candidate_order(space.extractors, config.max_candidates);
  rep.candidates = order.size();

  PredicateConfig pconf = config.predicate;
  pconf.max_node_depth = config.max_node_depth;

  std::mutex mu;
  std::optional<Program> best;
  std::optional<Cost> best_cost;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::string first_error;

  auto beaten = [&](std::size_t atoms, std::size_t constructs) {
    std::lock_guard lock(mu);
    return best_cost && std::pair(atoms, constructs) >
                            std::pair(best_cost->atoms, best_cost->constructs);
  };

  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= order.size() || stop.load()) return;
      if (Clock::now() > deadline) {
        stop = true;
        std::lock_guard lock(mu);
        rep.timed_out = true;
        return;
      }
      TableExtractor psi;
      for (std::size_t i = 0; i < k; ++i) psi.columns.push_back(space.extractors[i][order[c][i]]);
      const std::size_t constructs = psi.constructs();
      // Candidates come in nondecreasing construct order, so once a
      // predicate-free program of this size would lose, every later one does.
      if (beaten(0, constructs)) {
        std::lock_guard lock(mu);
        ++rep.pruned;
        continue;
      }
      try {
        if (best_cost && beaten(atom_lower_bound(examples, psi), constructs)) {
          std::lock_guard lock(mu);
          ++rep.pruned;
          continue;
        }
        PredicateReport prep;
        auto pred = learn_predicate(examples, psi, pconf, &prep);
        {
          std::lock_guard lock(mu);
          ++rep.learned;
          if (!prep.optimal) rep.optimal_covers = false;
          if (!pred) ++rep.no_predicate;
        }
        if (!pred) continue;
        Program p{std::move(psi), std::move(*pred)};
        if (!verify(p, examples)) {
          std::lock_guard lock(mu);
          ++rep.rejected;
          continue;
        }
        Cost pc = cost(p);
        std::lock_guard lock(mu);
        ++rep.consistent;
        if (!best_cost || pc < *best_cost) {
          best_cost = std::move(pc);
          best = std::move(p);
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        ++rep.no_predicate;
        if (first_error.empty()) first_error = e.what();
      }
    }
  };

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(order.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  rep.best_cost = best_cost;
  if (!best) {
    if (rep.timed_out) {
      rep.failure = SynthFailure::kBudget;
      rep.message = "time budget exhausted before any consistent program";
    } else {
      rep.failure = SynthFailure::kPredicate;
      rep.message = "no table extractor admits a separating predicate";
      if (!first_error.empty()) rep.message += " (" + first_error + ")";
    }
  }
  return finish(best);
}

std::string SynthReport::to_text() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os << "column " << i + 1 << ": " << columns[i].dfa_states << " states, "
       << columns[i].extractors << " extractors\n";
  }
  os << "candidates " << candidates << ", pruned " << pruned << ", learned " << learned
     << ", no predicate " << no_predicate << ", rejected " << rejected << ", consistent "
     << consistent << "\n";
  if (best_cost) {
    os << "cost atoms " << best_cost->atoms << ", constructs " << best_cost->constructs
       << "\n";
  }
  if (timed_out) os << "time budget exhausted\n";
  if (!optimal_covers) os << "some cover searches hit the node budget\n";
  if (!message.empty()) os << "failure: " << message << "\n";
  os << "seconds " << seconds << "\n";
  return os.str();
}

}  // namespace treeshred
