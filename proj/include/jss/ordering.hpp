#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jss/instance.hpp"

namespace jss {

// Complete branching order: rank[flat op id] = position, a bijection onto
// [0, op_count), position 0 branched first.
struct StaticOrder {
  std::vector<int> rank;

  bool is_permutation() const;
};

// One machine's predicted sequence entry; score is the number of pairwise
// comparisons that placed the operation later.
struct SeqEntry {
  int job = 0;
  int op = 0;
  int score = 0;
};

using MachineSequences = std::vector<std::vector<SeqEntry>>;

// Ascending by predicted value, ties by (EST, job, op index).
StaticOrder order_from_regression(const JssInstance& inst, std::span<const double> predictions);

// Per-machine sequences merged globally: each operation keyed by
// (score / max(1, k_m - 1), EST, job, op index), ascending.
StaticOrder order_from_classification(const JssInstance& inst, const MachineSequences& seqs);

// Ascending by start time, ties by (job, op index). The schedule must be
// feasible.
StaticOrder order_from_solution(const JssInstance& inst, const Schedule& schedule);

enum class StrategyKind { Random, MinDom, LowMin, Static, Hybrid };

struct Strategy {
  StrategyKind kind = StrategyKind::LowMin;
  std::uint64_t seed = 0;   // Random only
  StaticOrder order;        // Static / Hybrid only

  static Strategy random(std::uint64_t seed) { return Strategy{StrategyKind::Random, seed, {}}; }
  static Strategy min_dom() { return Strategy{StrategyKind::MinDom, 0, {}}; }
  static Strategy low_min() { return Strategy{StrategyKind::LowMin, 0, {}}; }
  static Strategy static_order(StaticOrder order) {
    return Strategy{StrategyKind::Static, 0, std::move(order)};
  }
  static Strategy hybrid(StaticOrder order) {
    return Strategy{StrategyKind::Hybrid, 0, std::move(order)};
  }
};

// Snapshot of the search state visible to variable selection. A variable is
// fixed when lb == ub; postponed variables (SetTimes right branches that
// have not been reawakened) are skipped like fixed ones. The counters feed
// the seeded Random choice so that selection stays a pure function of the
// snapshot.
struct BoundsView {
  std::span<const int> lb;
  std::span<const int> ub;
  std::span<const std::uint8_t> postponed;  // empty = none
  long long branches = 0;
  long long fails = 0;
};

// Flat id of the next variable to branch on, or -1 when all are fixed.
// Random: seeded uniform among unfixed. MinDom: smallest ub-lb+1. LowMin:
// smallest lb. Static: unfixed of minimal rank. Hybrid: smallest lb with
// static rank as tie-break. All ties resolve by (job, op) i.e. flat id.
int choose_next(const Strategy& strategy, const JssInstance& inst, const BoundsView& view);

}  // namespace jss
