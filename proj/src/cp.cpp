#include "jss/cp.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace jss {

CpModel build_model(const JssInstance& inst, Objective obj) {
  CpModel m;
  m.instance = inst;
  m.objective = obj;
  m.horizon = inst.horizon();

  const int n = inst.op_count();
  m.duration.resize(static_cast<std::size_t>(n));
  m.job_succ.assign(static_cast<std::size_t>(n), -1);
  m.job_pred.assign(static_cast<std::size_t>(n), -1);
  m.initial_lb.resize(static_cast<std::size_t>(n));
  m.initial_ub.resize(static_cast<std::size_t>(n));

  for (int j = 0; j < inst.job_count(); ++j) {
    const Job& job = inst.job(j);
    const int count = static_cast<int>(job.ops.size());
    for (int i = 0; i < count; ++i) {
      const int v = inst.flat_id(j, i);
      m.duration[static_cast<std::size_t>(v)] = job.ops[static_cast<std::size_t>(i)].duration;
      m.initial_lb[static_cast<std::size_t>(v)] = inst.earliest_start(j, i);
      m.initial_ub[static_cast<std::size_t>(v)] = m.horizon - job.ops[static_cast<std::size_t>(i)].duration;
      if (i + 1 < count) m.job_succ[static_cast<std::size_t>(v)] = inst.flat_id(j, i + 1);
      if (i > 0) m.job_pred[static_cast<std::size_t>(v)] = inst.flat_id(j, i - 1);
    }
    m.last_ops.push_back(inst.flat_id(j, count - 1));
  }

  m.machine_of.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) m.machine_of[static_cast<std::size_t>(v)] = inst.op(v).machine;

  m.peer_begin.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int mach = 0; mach < inst.machine_count(); ++mach)
    for (int v : inst.machine_ops(mach))
      m.peer_begin[static_cast<std::size_t>(v) + 1] =
          static_cast<int>(inst.machine_ops(mach).size()) - 1;
  for (int v = 0; v < n; ++v)
    m.peer_begin[static_cast<std::size_t>(v) + 1] += m.peer_begin[static_cast<std::size_t>(v)];
  m.peers.resize(static_cast<std::size_t>(m.peer_begin[static_cast<std::size_t>(n)]));
  {
    std::vector<int> cursor(m.peer_begin.begin(), m.peer_begin.end() - 1);
    for (int mach = 0; mach < inst.machine_count(); ++mach) {
      const auto& ops = inst.machine_ops(mach);
      for (int a : ops)
        for (int b : ops)
          if (a != b) m.peers[static_cast<std::size_t>(cursor[static_cast<std::size_t>(a)]++)] = b;
    }
  }
  return m;
}

SearchState::SearchState(const CpModel& model)
    : model_(&model), lb_(model.initial_lb), ub_(model.initial_ub) {
  const std::size_t n = lb_.size();
  in_queue_.assign(n, 0);
  queue_.reserve(n);
  trail_.reserve(4 * n);
  machine_dirty_.assign(static_cast<std::size_t>(model.instance.machine_count()), 1);
  // Everything pending: the first propagate call reaches the root fixpoint.
  for (int v = 0; v < static_cast<int>(n); ++v) enqueue(v);
}

bool SearchState::all_fixed() const {
  for (std::size_t v = 0; v < lb_.size(); ++v)
    if (lb_[v] != ub_[v]) return false;
  return true;
}

BoundsView SearchState::view() const { return BoundsView{lb_, ub_, {}, branches, fails}; }

void SearchState::undo_to(std::size_t m) {
  while (trail_.size() > m) {
    const TrailEntry e = trail_.back();
    trail_.pop_back();
    const int v = e.slot >> 1;
    if (e.slot & 1)
      ub_[static_cast<std::size_t>(v)] = e.old_value;
    else
      lb_[static_cast<std::size_t>(v)] = e.old_value;
    machine_dirty_[static_cast<std::size_t>(model_->machine_of[static_cast<std::size_t>(v)])] = 1;
  }
  // Pending propagation refers to abandoned decisions.
  for (std::size_t k = queue_head_; k < queue_.size(); ++k)
    in_queue_[static_cast<std::size_t>(queue_[k])] = 0;
  queue_.clear();
  queue_head_ = 0;
}

void SearchState::enqueue(int v) {
  if (in_queue_[static_cast<std::size_t>(v)]) return;
  in_queue_[static_cast<std::size_t>(v)] = 1;
  queue_.push_back(v);
}

int SearchState::pop_queue() {
  if (queue_head_ >= queue_.size()) {
    queue_.clear();
    queue_head_ = 0;
    return -1;
  }
  const int v = queue_[queue_head_++];
  in_queue_[static_cast<std::size_t>(v)] = 0;
  return v;
}

void SearchState::enqueue_all() {
  for (int v = 0; v < var_count(); ++v) enqueue(v);
  std::fill(machine_dirty_.begin(), machine_dirty_.end(), 1);
}

bool SearchState::tighten_lb(int v, int value) {
  auto& lb = lb_[static_cast<std::size_t>(v)];
  if (value <= lb) return true;
  trail_.push_back(TrailEntry{static_cast<std::int32_t>(v << 1), lb});
  lb = value;
  enqueue(v);
  machine_dirty_[static_cast<std::size_t>(model_->machine_of[static_cast<std::size_t>(v)])] = 1;
  return lb <= ub_[static_cast<std::size_t>(v)];
}

bool SearchState::tighten_ub(int v, int value) {
  auto& ub = ub_[static_cast<std::size_t>(v)];
  if (value >= ub) return true;
  trail_.push_back(TrailEntry{static_cast<std::int32_t>((v << 1) | 1), ub});
  ub = value;
  enqueue(v);
  machine_dirty_[static_cast<std::size_t>(model_->machine_of[static_cast<std::size_t>(v)])] = 1;
  return lb_[static_cast<std::size_t>(v)] <= ub;
}

namespace {

// Objective cut against the incumbent: restricts each job's last operation
// so only strictly better schedules survive. Returns false on failure.
bool apply_objective_cut(SearchState& st) {
  const auto zopt = st.incumbent_bound();
  if (!zopt) return true;
  const long long z = *zopt;
  const CpModel& m = st.model();

  switch (m.objective) {
    case Objective::Cmax: {
      for (std::size_t j = 0; j < m.last_ops.size(); ++j) {
        const int v = m.last_ops[j];
        const long long cap = z - 1 - m.duration[static_cast<std::size_t>(v)];
        if (cap < 0) return false;
        if (!st.tighten_ub(v, static_cast<int>(cap))) return false;
      }
      return true;
    }
    case Objective::Tmax: {
      for (std::size_t j = 0; j < m.last_ops.size(); ++j) {
        const int v = m.last_ops[j];
        const long long cap =
            m.instance.job(static_cast<int>(j)).due + z - 1 - m.duration[static_cast<std::size_t>(v)];
        if (cap < 0) return false;
        if (!st.tighten_ub(v, static_cast<int>(cap))) return false;
      }
      return true;
    }
    case Objective::Twt: {
      // Weak bound: sum of per-job tardiness lower bounds.
      long long total = 0;
      for (std::size_t j = 0; j < m.last_ops.size(); ++j) {
        const int v = m.last_ops[j];
        const Job& job = m.instance.job(static_cast<int>(j));
        const long long completion_lb = st.lb(v) + m.duration[static_cast<std::size_t>(v)];
        total += job.weight * std::max<long long>(completion_lb - job.due, 0);
      }
      if (total >= z) return false;
      for (std::size_t j = 0; j < m.last_ops.size(); ++j) {
        const int v = m.last_ops[j];
        const Job& job = m.instance.job(static_cast<int>(j));
        const long long completion_lb = st.lb(v) + m.duration[static_cast<std::size_t>(v)];
        const long long contrib = job.weight * std::max<long long>(completion_lb - job.due, 0);
        const long long slack = z - 1 - (total - contrib);
        const long long max_tardiness = slack / job.weight;
        const long long cap = job.due + max_tardiness - m.duration[static_cast<std::size_t>(v)];
        if (cap < 0) return false;
        if (!st.tighten_ub(v, static_cast<int>(std::min<long long>(cap, m.horizon)))) return false;
      }
      return true;
    }
  }
  return true;
}

}  // namespace

namespace {

using EfTask = SearchState::EfTask;

// Disjunctive edge-finding over one machine, primal direction. For every
// suffix set S (by est) of the lct-confined tasks, an outside task that
// cannot fit with S inside S's window must run after all of S, so its est
// rises to S's earliest-completion bound. Returns false when a set alone
// overloads its window. Updates are emitted as (var, new_est) pairs.
bool edge_find_dir(std::vector<EfTask>& tasks, std::vector<std::pair<int, int>>& updates) {
  const int k = static_cast<int>(tasks.size());
  if (k < 2) return true;
  std::sort(tasks.begin(), tasks.end(),
            [](const EfTask& a, const EfTask& b) { return a.est < b.est; });

  for (int b = 0; b < k; ++b) {
    const int lct = tasks[static_cast<std::size_t>(b)].lct;
    if (b > 0 && tasks[static_cast<std::size_t>(b - 1)].lct == lct) continue;

    long long work = 0;
    long long ect = std::numeric_limits<long long>::min();
    for (int idx = k - 1; idx >= 0; --idx) {
      const EfTask& in = tasks[static_cast<std::size_t>(idx)];
      if (in.lct > lct) continue;
      work += in.dur;
      ect = std::max(ect, static_cast<long long>(in.est) + work);
      if (ect > lct) return false;  // the set alone overloads its window

      // Outside tasks (lct beyond the window) that cannot also fit in it.
      for (int i = 0; i < k; ++i) {
        const EfTask& out = tasks[static_cast<std::size_t>(i)];
        if (out.lct <= lct) continue;
        if (static_cast<long long>(std::min(out.est, in.est)) + out.dur + work > lct &&
            ect > out.est)
          updates.emplace_back(out.var, static_cast<int>(ect));
      }
    }
  }
  return true;
}

}  // namespace

bool propagate(SearchState& st) {
  const CpModel& m = st.model();
  for (;;) {
    int v;
    while ((v = st.pop_queue()) >= 0) {
      const int dv = m.duration[static_cast<std::size_t>(v)];

      // (a) chain precedences
      const int succ = m.job_succ[static_cast<std::size_t>(v)];
      if (succ >= 0 && !st.tighten_lb(succ, st.lb(v) + dv)) return false;
      const int pred = m.job_pred[static_cast<std::size_t>(v)];
      if (pred >= 0 &&
          !st.tighten_ub(pred, st.ub(v) - m.duration[static_cast<std::size_t>(pred)]))
        return false;

      // (b) pairwise disjunctive
      const int begin = m.peer_begin[static_cast<std::size_t>(v)];
      const int end = m.peer_begin[static_cast<std::size_t>(v) + 1];
      for (int k = begin; k < end; ++k) {
        const int u = m.peers[static_cast<std::size_t>(k)];
        const int du = m.duration[static_cast<std::size_t>(u)];
        const bool v_first_ok = st.lb(v) + dv <= st.ub(u);
        const bool u_first_ok = st.lb(u) + du <= st.ub(v);
        if (!v_first_ok && !u_first_ok) return false;
        if (!v_first_ok) {
          // u before v is forced: s_v >= s_u + p_u and s_u <= s_v - p_u
          if (!st.tighten_lb(v, st.lb(u) + du)) return false;
          if (!st.tighten_ub(u, st.ub(v) - du)) return false;
        } else if (!u_first_ok) {
          // v before u is forced
          if (!st.tighten_lb(u, st.lb(v) + dv)) return false;
          if (!st.tighten_ub(v, st.ub(u) - dv)) return false;
        }
      }
    }

    // (c) objective cut; rerun the rules above if it moved any bound.
    if (!apply_objective_cut(st)) return false;
    if (st.queue_head_ < st.queue_.size()) continue;

    // Edge finding on machines whose bounds moved, primal (est side) and
    // time-reversed dual (lct side). Updates re-enter the fixpoint loop.
    bool ran_ef = false;
    for (int mach = 0; mach < m.instance.machine_count(); ++mach) {
      if (!st.machine_dirty_[static_cast<std::size_t>(mach)]) continue;
      st.machine_dirty_[static_cast<std::size_t>(mach)] = 0;
      ran_ef = true;
      const auto& ops = m.instance.machine_ops(mach);
      if (ops.size() < 2) continue;

      st.ef_tasks_.clear();
      for (int op : ops)
        st.ef_tasks_.push_back(EfTask{st.lb(op), st.ub(op) + m.duration[static_cast<std::size_t>(op)],
                                      m.duration[static_cast<std::size_t>(op)], op});
      st.ef_updates_.clear();
      if (!edge_find_dir(st.ef_tasks_, st.ef_updates_)) return false;
      for (const auto& [op, est] : st.ef_updates_)
        if (!st.tighten_lb(op, est)) return false;

      st.ef_tasks_.clear();
      for (int op : ops)
        st.ef_tasks_.push_back(EfTask{-(st.ub(op) + m.duration[static_cast<std::size_t>(op)]),
                                      -st.lb(op), m.duration[static_cast<std::size_t>(op)], op});
      st.ef_updates_.clear();
      if (!edge_find_dir(st.ef_tasks_, st.ef_updates_)) return false;
      for (const auto& [op, est] : st.ef_updates_)
        if (!st.tighten_ub(op, -est - m.duration[static_cast<std::size_t>(op)])) return false;
    }
    if (!ran_ef && st.queue_head_ >= st.queue_.size()) return true;
    if (st.queue_head_ >= st.queue_.size() && !std::any_of(st.machine_dirty_.begin(),
                                                           st.machine_dirty_.end(),
                                                           [](std::uint8_t d) { return d != 0; }))
      return true;
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

long long leaf_value(const SearchState& st) {
  const CpModel& m = st.model();
  long long value = 0;
  for (std::size_t j = 0; j < m.last_ops.size(); ++j) {
    const int v = m.last_ops[j];
    const Job& job = m.instance.job(static_cast<int>(j));
    const long long completion = st.lb(v) + m.duration[static_cast<std::size_t>(v)];
    switch (m.objective) {
      case Objective::Cmax: value = std::max(value, completion); break;
      case Objective::Tmax: value = std::max(value, std::max<long long>(completion - job.due, 0)); break;
      case Objective::Twt: value += job.weight * std::max<long long>(completion - job.due, 0); break;
    }
  }
  return value;
}

}  // namespace

namespace {

// Destructive bound probing at the root: hypothesize s_v <= theta (resp.
// s_v >= theta) in a trailed sandbox; a propagation failure refutes the
// hypothesis and the surviving half-domain is kept for real. Probing is
// monotone (a smaller window refutes whenever a larger one does), so the
// frontier is found by bisection. Returns false when a whole domain is
// refuted, i.e. no schedule beats the incumbent.
bool shave_root(SearchState& st) {
  const int n = st.var_count();
  bool changed = true;
  int rounds = 0;
  while (changed && rounds++ < 4) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (st.fixed(v)) continue;

      auto probe_le = [&](int theta) {
        const std::size_t mark = st.mark();
        bool ok = st.tighten_ub(v, theta) && propagate(st);
        st.undo_to(mark);
        return ok;
      };
      if (!probe_le(st.lb(v))) {
        if (!probe_le(st.ub(v))) return false;
        int lo = st.lb(v), hi = st.ub(v);  // lo refuted, hi not
        while (hi - lo > 1) {
          const int mid = lo + (hi - lo) / 2;
          (probe_le(mid) ? hi : lo) = mid;
        }
        if (!st.tighten_lb(v, hi) || !propagate(st)) return false;
        changed = true;
      }

      if (st.fixed(v)) continue;
      auto probe_ge = [&](int theta) {
        const std::size_t mark = st.mark();
        bool ok = st.tighten_lb(v, theta) && propagate(st);
        st.undo_to(mark);
        return ok;
      };
      if (!probe_ge(st.ub(v))) {
        if (!probe_ge(st.lb(v))) return false;
        int lo = st.lb(v), hi = st.ub(v);  // lo not refuted, hi refuted
        while (hi - lo > 1) {
          const int mid = lo + (hi - lo) / 2;
          (probe_ge(mid) ? lo : hi) = mid;
        }
        if (!st.tighten_ub(v, lo) || !propagate(st)) return false;
        changed = true;
      }
    }
  }
  return true;
}

}  // namespace

SolveResult solve(const CpModel& model, const Strategy& strategy, const SolveLimits& limits) {
  if (limits.time_limit_secs <= 0 || limits.max_branches <= 0)
    throw std::invalid_argument("solve limits must be positive");

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  SearchState st(model);
  SolveResult result;
  const int n = st.var_count();

  // Restart-with-shaving discipline: after an incumbent improvement at
  // least kRestartGap branches past the previous restart, the search
  // unwinds to the root, shaves the root box against the new bound and
  // starts over. The final exhaustion run proves optimality over the
  // shaved box. All triggers are branch-count based, so runs stay
  // deterministic.
  constexpr long long kRestartGap = 1024;
  long long last_restart = 0;
  bool improvement_pending = false;
  bool root_infeasible = false;

  // SetTimes bookkeeping: a right branch postpones its variable at the lb it
  // rejected; the variable stays unselectable until propagation raises its
  // lb past that value.
  std::vector<int> postponed_at(static_cast<std::size_t>(n), -1);
  std::vector<std::uint8_t> postponed_mask(static_cast<std::size_t>(n), 0);

  struct Frame {
    int var;
    int left_value;
    int saved_postponed;
    std::size_t mark;
    bool right_done;
  };
  std::vector<Frame> stack;
  stack.reserve(static_cast<std::size_t>(n) * 2);

  const bool has_time_limit = std::isfinite(limits.time_limit_secs);
  bool exhausted = false;
  bool descending = true;

  auto out_of_budget = [&] {
    if (st.branches >= limits.max_branches) return true;
    if (has_time_limit && (st.branches & 1023) == 0 && elapsed() > limits.time_limit_secs)
      return true;
    return false;
  };

  if (!propagate(st) || !shave_root(st)) root_infeasible = true;

  while (!root_infeasible) {
    if (improvement_pending && st.branches - last_restart >= kRestartGap) {
      improvement_pending = false;
      last_restart = st.branches;
      st.undo_to(0);
      st.enqueue_all();
      std::fill(postponed_at.begin(), postponed_at.end(), -1);
      stack.clear();
      if (!propagate(st) || !shave_root(st)) {
        exhausted = true;  // nothing beats the incumbent
        break;
      }
      descending = true;
    }
    if (descending) {
      if (!propagate(st)) {
        ++st.fails;
        descending = false;
        continue;
      }
      bool dead_postponed = false;
      for (int v = 0; v < n && !dead_postponed; ++v) {
        const bool asleep = postponed_at[static_cast<std::size_t>(v)] >= 0 &&
                            st.lb(v) <= postponed_at[static_cast<std::size_t>(v)];
        postponed_mask[static_cast<std::size_t>(v)] = asleep ? 1 : 0;
        if (!asleep || st.fixed(v)) continue;
        // A sleeping variable none of whose influencers can move again will
        // never reawaken; the whole subtree is dominated.
        const int pred = model.job_pred[static_cast<std::size_t>(v)];
        if (pred >= 0 && !st.fixed(pred)) continue;
        bool influencer_open = false;
        const int begin = model.peer_begin[static_cast<std::size_t>(v)];
        const int end = model.peer_begin[static_cast<std::size_t>(v) + 1];
        for (int k = begin; k < end && !influencer_open; ++k)
          if (!st.fixed(model.peers[static_cast<std::size_t>(k)])) influencer_open = true;
        if (!influencer_open) dead_postponed = true;
      }
      if (dead_postponed) {
        ++st.fails;
        descending = false;
        continue;
      }
      BoundsView view = st.view();
      view.postponed = postponed_mask;
      const int v = choose_next(strategy, model.instance, view);
      if (v < 0) {
        if (st.all_fixed()) {
          // Leaf: bounds certify feasibility.
          const long long value = leaf_value(st);
          if (!result.first_incumbent) result.first_incumbent = value;
          if (!result.best || value < *result.best) {
            if (std::getenv("JSS_TRACE")) std::fprintf(stderr, "incumbent %lld at branch %lld\n", value, st.branches);
            result.best = value;
            result.best_schedule =
                Schedule{std::vector<int>(view.lb.begin(), view.lb.end())};
            st.set_incumbent_bound(value);
            improvement_pending = true;
          }
        } else {
          // Every open variable is postponed: any completion would need the
          // first-starting one at exactly the lb its right branch excluded.
          ++st.fails;
        }
        descending = false;
        continue;
      }
      if (out_of_budget()) break;
      stack.push_back(Frame{v, st.lb(v), postponed_at[static_cast<std::size_t>(v)], st.mark(), false});
      ++st.branches;
      if (!st.tighten_ub(v, st.lb(v))) {
        ++st.fails;
        descending = false;
      }
      continue;
    }

    // Backtracking.
    if (stack.empty()) {
      exhausted = true;
      break;
    }
    Frame& f = stack.back();
    if (!f.right_done) {
      st.undo_to(f.mark);
      f.right_done = true;
      if (out_of_budget()) break;
      ++st.branches;
      postponed_at[static_cast<std::size_t>(f.var)] = f.left_value;
      descending = true;
      continue;
    }
    st.undo_to(f.mark);
    postponed_at[static_cast<std::size_t>(f.var)] = f.saved_postponed;
    stack.pop_back();
  }

  result.branches = st.branches;
  result.fails = st.fails;
  result.elapsed_secs = elapsed();
  if (root_infeasible)
    result.status = SolveStatus::Infeasible;
  else if (exhausted)
    result.status = result.best ? SolveStatus::Optimal : SolveStatus::Infeasible;
  else
    result.status = SolveStatus::Feasible;
  return result;
}

}  // namespace jss
