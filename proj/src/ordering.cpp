#include "jss/ordering.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "jss/util/rng.hpp"

namespace jss {

bool StaticOrder::is_permutation() const {
  std::vector<char> seen(rank.size(), 0);
  for (int r : rank) {
    if (r < 0 || r >= static_cast<int>(rank.size()) || seen[static_cast<std::size_t>(r)]) return false;
    seen[static_cast<std::size_t>(r)] = 1;
  }
  return true;
}

namespace {

// Sorts flat ids by key and inverts the permutation into ranks.
template <typename Key>
StaticOrder rank_by(const JssInstance& inst, Key key) {
  std::vector<int> ids(static_cast<std::size_t>(inst.op_count()));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return key(a) < key(b); });

  StaticOrder order;
  order.rank.assign(ids.size(), 0);
  for (int pos = 0; pos < static_cast<int>(ids.size()); ++pos)
    order.rank[static_cast<std::size_t>(ids[static_cast<std::size_t>(pos)])] = pos;
  return order;
}

}  // namespace

StaticOrder order_from_regression(const JssInstance& inst, std::span<const double> predictions) {
  if (predictions.size() != static_cast<std::size_t>(inst.op_count()))
    throw std::invalid_argument("need one prediction per operation");
  return rank_by(inst, [&](int v) {
    const OpRef r = inst.op_ref(v);
    return std::make_tuple(predictions[static_cast<std::size_t>(v)], inst.earliest_start(v), r.job, r.op);
  });
}

StaticOrder order_from_classification(const JssInstance& inst, const MachineSequences& seqs) {
  if (seqs.size() != static_cast<std::size_t>(inst.machine_count()))
    throw std::invalid_argument("need one sequence per machine");

  std::vector<double> key_score(static_cast<std::size_t>(inst.op_count()), -1.0);
  for (int m = 0; m < inst.machine_count(); ++m) {
    const auto& seq = seqs[static_cast<std::size_t>(m)];
    if (seq.size() != inst.machine_ops(m).size())
      throw std::invalid_argument("sequence does not cover machine " + std::to_string(m));
    const double denom = std::max<std::size_t>(1, seq.size() - 1);
    for (const SeqEntry& e : seq) {
      if (e.job < 0 || e.job >= inst.job_count() ||
          e.op < 0 || e.op >= static_cast<int>(inst.job(e.job).ops.size()) ||
          inst.op(e.job, e.op).machine != m)
        throw std::invalid_argument("sequence entry does not belong to machine " + std::to_string(m));
      auto& slot = key_score[static_cast<std::size_t>(inst.flat_id(e.job, e.op))];
      if (slot >= 0) throw std::invalid_argument("duplicate sequence entry");
      slot = static_cast<double>(e.score) / denom;
    }
  }
  return rank_by(inst, [&](int v) {
    const OpRef r = inst.op_ref(v);
    return std::make_tuple(key_score[static_cast<std::size_t>(v)], inst.earliest_start(v), r.job, r.op);
  });
}

StaticOrder order_from_solution(const JssInstance& inst, const Schedule& schedule) {
  evaluate(inst, schedule, Objective::Cmax);  // feasibility gate
  return rank_by(inst, [&](int v) {
    const OpRef r = inst.op_ref(v);
    return std::make_tuple(schedule.start[static_cast<std::size_t>(v)], r.job, r.op);
  });
}

int choose_next(const Strategy& strategy, const JssInstance& inst, const BoundsView& view) {
  const int n = static_cast<int>(view.lb.size());
  const auto selectable = [&](int v) {
    if (view.lb[static_cast<std::size_t>(v)] == view.ub[static_cast<std::size_t>(v)]) return false;
    return view.postponed.empty() || !view.postponed[static_cast<std::size_t>(v)];
  };

  switch (strategy.kind) {
    case StrategyKind::Random: {
      int open = 0;
      for (int v = 0; v < n; ++v)
        if (selectable(v)) ++open;
      if (open == 0) return -1;
      std::uint64_t h = splitmix64(strategy.seed ^ splitmix64(static_cast<std::uint64_t>(view.branches)) ^
                                   (splitmix64(static_cast<std::uint64_t>(view.fails)) << 1));
      int pick = static_cast<int>(h % static_cast<std::uint64_t>(open));
      for (int v = 0; v < n; ++v) {
        if (!selectable(v)) continue;
        if (pick-- == 0) return v;
      }
      return -1;
    }
    case StrategyKind::MinDom: {
      int best = -1, best_size = 0;
      for (int v = 0; v < n; ++v) {
        if (!selectable(v)) continue;
        const int size = view.ub[static_cast<std::size_t>(v)] - view.lb[static_cast<std::size_t>(v)] + 1;
        if (best < 0 || size < best_size) best = v, best_size = size;
      }
      return best;
    }
    case StrategyKind::LowMin: {
      int best = -1, best_lb = 0;
      for (int v = 0; v < n; ++v) {
        if (!selectable(v)) continue;
        if (best < 0 || view.lb[static_cast<std::size_t>(v)] < best_lb)
          best = v, best_lb = view.lb[static_cast<std::size_t>(v)];
      }
      return best;
    }
    case StrategyKind::Static: {
      int best = -1, best_rank = 0;
      for (int v = 0; v < n; ++v) {
        if (!selectable(v)) continue;
        const int r = strategy.order.rank[static_cast<std::size_t>(v)];
        if (best < 0 || r < best_rank) best = v, best_rank = r;
      }
      return best;
    }
    case StrategyKind::Hybrid: {
      int best = -1, best_lb = 0, best_rank = 0;
      for (int v = 0; v < n; ++v) {
        if (!selectable(v)) continue;
        const int lb = view.lb[static_cast<std::size_t>(v)];
        const int r = strategy.order.rank[static_cast<std::size_t>(v)];
        if (best < 0 || lb < best_lb || (lb == best_lb && r < best_rank))
          best = v, best_lb = lb, best_rank = r;
      }
      return best;
    }
  }
  return -1;
}

}  // namespace jss
