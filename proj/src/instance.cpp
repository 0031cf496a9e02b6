#include "jss/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "jss/error.hpp"
#include "jss/util/rng.hpp"

namespace jss {

std::string to_string(Objective obj) {
  switch (obj) {
    case Objective::Cmax: return "cmax";
    case Objective::Tmax: return "tmax";
    case Objective::Twt: return "twt";
  }
  return "?";
}

std::optional<Objective> objective_from_string(std::string_view token) {
  if (token == "cmax") return Objective::Cmax;
  if (token == "tmax") return Objective::Tmax;
  if (token == "twt") return Objective::Twt;
  return std::nullopt;
}

int Job::total_processing() const {
  int tpt = 0;
  for (const Operation& o : ops) tpt += o.duration;
  return tpt;
}

JssInstance::JssInstance(std::vector<Job> jobs, int machine_count)
    : jobs_(std::move(jobs)), machine_count_(machine_count) {
  if (machine_count_ < 1) throw std::invalid_argument("machine count must be >= 1");
  if (jobs_.empty()) throw std::invalid_argument("instance needs at least one job");

  workload_.assign(static_cast<std::size_t>(machine_count_), 0);
  machine_ops_.assign(static_cast<std::size_t>(machine_count_), {});
  std::vector<char> seen(static_cast<std::size_t>(machine_count_), 0);

  long long total_duration = 0;
  int max_release = 0;
  for (int j = 0; j < job_count(); ++j) {
    const Job& job = jobs_[static_cast<std::size_t>(j)];
    if (job.ops.empty()) throw std::invalid_argument("job has no operations");
    if (job.release < 0 || job.due < 0) throw std::invalid_argument("negative release or due date");
    if (job.weight < 1) throw std::invalid_argument("weight must be >= 1");

    std::fill(seen.begin(), seen.end(), 0);
    offsets_.push_back(op_count_);
    for (int i = 0; i < static_cast<int>(job.ops.size()); ++i) {
      const Operation& o = job.ops[static_cast<std::size_t>(i)];
      if (o.machine < 0 || o.machine >= machine_count_)
        throw std::invalid_argument("machine index out of range");
      if (seen[static_cast<std::size_t>(o.machine)])
        throw std::invalid_argument("job visits a machine twice");
      seen[static_cast<std::size_t>(o.machine)] = 1;
      if (o.duration < 1) throw std::invalid_argument("duration must be >= 1");

      workload_[static_cast<std::size_t>(o.machine)] += o.duration;
      machine_ops_[static_cast<std::size_t>(o.machine)].push_back(op_count_);
      refs_.push_back(OpRef{j, i});
      total_duration += o.duration;
      ++op_count_;
    }
    max_tpt_ = std::max(max_tpt_, job.total_processing());
    max_weight_ = std::max(max_weight_, job.weight);
    max_release = std::max(max_release, job.release);
  }
  horizon_ = max_release + static_cast<int>(total_duration);
}

OpRef JssInstance::op_ref(int flat) const { return refs_[static_cast<std::size_t>(flat)]; }

const Operation& JssInstance::op(int flat) const {
  const OpRef r = refs_[static_cast<std::size_t>(flat)];
  return jobs_[static_cast<std::size_t>(r.job)].ops[static_cast<std::size_t>(r.op)];
}

int JssInstance::earliest_start(int j, int i) const {
  const Job& job = jobs_[static_cast<std::size_t>(j)];
  int est = job.release;
  for (int k = 0; k < i; ++k) est += job.ops[static_cast<std::size_t>(k)].duration;
  return est;
}

int JssInstance::earliest_start(int flat) const {
  const OpRef r = refs_[static_cast<std::size_t>(flat)];
  return earliest_start(r.job, r.op);
}

bool JssInstance::operator==(const JssInstance& other) const {
  if (machine_count_ != other.machine_count_ || job_count() != other.job_count()) return false;
  for (int j = 0; j < job_count(); ++j) {
    const Job& a = job(j);
    const Job& b = other.job(j);
    if (a.release != b.release || a.due != b.due || a.weight != b.weight) return false;
    if (a.ops.size() != b.ops.size()) return false;
    for (std::size_t i = 0; i < a.ops.size(); ++i)
      if (a.ops[i].machine != b.ops[i].machine || a.ops[i].duration != b.ops[i].duration)
        return false;
  }
  return true;
}

int due_from_allowance(double h, int release, int tpt) {
  return release + static_cast<int>(std::ceil(h * tpt - 1e-9));
}

JssInstance generate(int n_jobs, int n_machines, double h, std::uint64_t seed) {
  if (n_jobs < 1 || n_machines < 1) throw std::invalid_argument("instance dimensions must be >= 1");
  if (h <= 0) throw std::invalid_argument("due-date allowance must be positive");

  Rng rng(seed);
  const int release_max = static_cast<int>(0.25 * n_machines * 50);

  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(n_jobs));
  std::vector<int> route(static_cast<std::size_t>(n_machines));
  for (int j = 0; j < n_jobs; ++j) {
    std::iota(route.begin(), route.end(), 0);
    rng.shuffle(route);

    Job job;
    job.ops.reserve(route.size());
    for (int m : route) job.ops.push_back(Operation{m, rng.uniform_int(1, 99)});
    job.release = rng.uniform_int(0, release_max);
    job.weight = rng.uniform_int(1, 10);
    job.due = due_from_allowance(h, job.release, job.total_processing());
    jobs.push_back(std::move(job));
  }
  return JssInstance(std::move(jobs), n_machines);
}

namespace {

struct LineTokens {
  int line = 0;
  std::vector<long long> values;
};

// Splits into non-blank lines of integer tokens, tracking 1-based line numbers.
std::vector<LineTokens> tokenize_lines(const std::string& text) {
  std::vector<LineTokens> out;
  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    LineTokens lt;
    lt.line = lineno;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t pos = 0;
        long long v = std::stoll(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        lt.values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(lineno, "expected an integer, got '" + tok + "'");
      }
    }
    if (!lt.values.empty()) out.push_back(std::move(lt));
  }
  return out;
}

int checked_int(long long v, int lo, int hi, int line, const char* what) {
  if (v < lo || v > hi)
    throw ParseError(line, std::string(what) + " out of range: " + std::to_string(v));
  return static_cast<int>(v);
}

// Caller guarantees an even number of tokens from `first` on.
std::vector<Operation> parse_route(const std::vector<long long>& vals, std::size_t first,
                                   int machines, int line) {
  std::vector<Operation> ops;
  std::vector<char> seen(static_cast<std::size_t>(machines), 0);
  for (std::size_t k = first; k + 1 < vals.size(); k += 2) {
    int m = checked_int(vals[k], 0, machines - 1, line, "machine index");
    int p = checked_int(vals[k + 1], 1, 1 << 28, line, "duration");
    if (seen[static_cast<std::size_t>(m)])
      throw ParseError(line, "machine " + std::to_string(m) + " repeated in route");
    seen[static_cast<std::size_t>(m)] = 1;
    ops.push_back(Operation{m, p});
  }
  return ops;
}

}  // namespace

JssInstance parse_orlib(const std::string& text) {
  auto lines = tokenize_lines(text);
  if (lines.empty()) throw ParseError(1, "missing header 'N M'");
  const auto& header = lines[0];
  if (header.values.size() != 2) throw ParseError(header.line, "header must be 'N M'");
  int n = checked_int(header.values[0], 1, 1 << 20, header.line, "job count");
  int m = checked_int(header.values[1], 1, 1 << 20, header.line, "machine count");

  if (static_cast<int>(lines.size()) - 1 < n)
    throw ParseError(lines.back().line, "expected " + std::to_string(n) + " job lines, got " +
                                            std::to_string(lines.size() - 1));
  if (static_cast<int>(lines.size()) - 1 > n)
    throw ParseError(lines[static_cast<std::size_t>(n) + 1].line, "unexpected extra line");

  std::vector<Job> jobs;
  for (int j = 0; j < n; ++j) {
    const auto& lt = lines[static_cast<std::size_t>(j) + 1];
    if (lt.values.size() != static_cast<std::size_t>(2 * m))
      throw ParseError(lt.line, "expected " + std::to_string(m) + " machine/duration pairs, got " +
                                    std::to_string(lt.values.size() / 2));
    Job job;
    job.release = 0;
    job.due = 0;
    job.weight = 1;
    job.ops = parse_route(lt.values, 0, m, lt.line);
    jobs.push_back(std::move(job));
  }
  try {
    return JssInstance(std::move(jobs), m);
  } catch (const std::invalid_argument& e) {
    throw ParseError(lines[0].line, e.what());
  }
}

JssInstance parse_native(const std::string& text) {
  std::istringstream stream(text);
  std::string header_line;
  int lineno = 0;
  while (std::getline(stream, header_line)) {
    ++lineno;
    if (header_line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::istringstream hs(header_line);
  long long n = 0, m = 0;
  std::string tag;
  if (!(hs >> n >> m >> tag) || tag != "native-v1")
    throw ParseError(lineno, "header must be 'N M native-v1'");
  int jobs_n = checked_int(n, 1, 1 << 20, lineno, "job count");
  int machines = checked_int(m, 1, 1 << 20, lineno, "machine count");

  std::string rest((std::istreambuf_iterator<char>(stream)), std::istreambuf_iterator<char>());
  auto lines = tokenize_lines(rest);
  for (auto& lt : lines) lt.line += lineno;

  if (static_cast<int>(lines.size()) < jobs_n)
    throw ParseError(lineno, "expected " + std::to_string(jobs_n) + " job lines, got " +
                                 std::to_string(lines.size()));
  if (static_cast<int>(lines.size()) > jobs_n)
    throw ParseError(lines[static_cast<std::size_t>(jobs_n)].line, "unexpected extra line");

  std::vector<Job> jobs;
  for (int j = 0; j < jobs_n; ++j) {
    const auto& lt = lines[static_cast<std::size_t>(j)];
    if (lt.values.size() < 5 || (lt.values.size() - 3) % 2 != 0)
      throw ParseError(lt.line, "expected 'r d w' followed by machine/duration pairs");
    Job job;
    job.release = checked_int(lt.values[0], 0, 1 << 28, lt.line, "release");
    job.due = checked_int(lt.values[1], 0, 1 << 28, lt.line, "due date");
    job.weight = checked_int(lt.values[2], 1, 1 << 28, lt.line, "weight");
    job.ops = parse_route(lt.values, 3, machines, lt.line);
    jobs.push_back(std::move(job));
  }
  try {
    return JssInstance(std::move(jobs), machines);
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
}

JssInstance parse_instance(const std::string& text) {
  std::istringstream stream(text);
  std::string first;
  int lineno = 0;
  while (std::getline(stream, first)) {
    ++lineno;
    if (first.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (first.find("native-v1") != std::string::npos) return parse_native(text);
  return parse_orlib(text);
}

std::string serialize_orlib(const JssInstance& inst) {
  std::ostringstream out;
  out << inst.job_count() << ' ' << inst.machine_count() << '\n';
  for (const Job& job : inst.jobs()) {
    bool first = true;
    for (const Operation& o : job.ops) {
      if (!first) out << ' ';
      out << o.machine << ' ' << o.duration;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

std::string serialize_native(const JssInstance& inst) {
  std::ostringstream out;
  out << inst.job_count() << ' ' << inst.machine_count() << " native-v1\n";
  for (const Job& job : inst.jobs()) {
    out << job.release << ' ' << job.due << ' ' << job.weight << ' ';
    for (const Operation& o : job.ops) out << ' ' << o.machine << ' ' << o.duration;
    out << '\n';
  }
  return out.str();
}

std::string serialize_schedule(const JssInstance& inst, const Schedule& s) {
  if (s.start.size() != static_cast<std::size_t>(inst.op_count()))
    throw std::invalid_argument("schedule is incomplete");
  std::ostringstream out;
  out << "sol-v1 " << inst.job_count() << ' ' << inst.machine_count() << '\n';
  for (int j = 0; j < inst.job_count(); ++j) {
    for (int i = 0; i < static_cast<int>(inst.job(j).ops.size()); ++i) {
      if (i) out << ' ';
      out << s.at(inst, j, i);
    }
    out << '\n';
  }
  return out.str();
}

Schedule parse_schedule(const JssInstance& inst, const std::string& text) {
  std::istringstream stream(text);
  std::string header;
  if (!std::getline(stream, header)) throw ParseError(1, "missing 'sol-v1 N M' header");
  std::istringstream hs(header);
  std::string tag;
  long long n = 0, m = 0;
  if (!(hs >> tag >> n >> m) || tag != "sol-v1")
    throw ParseError(1, "missing 'sol-v1 N M' header");
  if (n != inst.job_count() || m != inst.machine_count())
    throw ParseError(1, "schedule dimensions do not match instance");

  std::string rest((std::istreambuf_iterator<char>(stream)), std::istreambuf_iterator<char>());
  auto lines = tokenize_lines(rest);
  for (auto& lt : lines) lt.line += 1;
  if (static_cast<int>(lines.size()) != inst.job_count())
    throw ParseError(lines.empty() ? 1 : lines.back().line, "wrong number of job lines");

  Schedule s;
  s.start.assign(static_cast<std::size_t>(inst.op_count()), 0);
  for (int j = 0; j < inst.job_count(); ++j) {
    const auto& lt = lines[static_cast<std::size_t>(j)];
    if (lt.values.size() != inst.job(j).ops.size())
      throw ParseError(lt.line, "wrong number of start times for job " + std::to_string(j));
    for (int i = 0; i < static_cast<int>(lt.values.size()); ++i)
      s.start[static_cast<std::size_t>(inst.flat_id(j, i))] =
          checked_int(lt.values[static_cast<std::size_t>(i)], 0, 1 << 30, lt.line, "start time");
  }
  return s;
}

long long evaluate(const JssInstance& inst, const Schedule& s, Objective obj) {
  if (s.start.size() != static_cast<std::size_t>(inst.op_count()))
    throw std::invalid_argument("schedule is incomplete");

  for (int j = 0; j < inst.job_count(); ++j) {
    const Job& job = inst.job(j);
    if (s.at(inst, j, 0) < job.release)
      throw FeasibilityError("release violated for job " + std::to_string(j));
    for (int i = 0; i + 1 < static_cast<int>(job.ops.size()); ++i) {
      if (s.at(inst, j, i + 1) < s.at(inst, j, i) + job.ops[static_cast<std::size_t>(i)].duration)
        throw FeasibilityError("precedence violated between ops " + std::to_string(i) + " and " +
                               std::to_string(i + 1) + " of job " + std::to_string(j));
    }
  }

  for (int m = 0; m < inst.machine_count(); ++m) {
    std::vector<int> ops = inst.machine_ops(m);
    std::sort(ops.begin(), ops.end(), [&](int a, int b) {
      return s.start[static_cast<std::size_t>(a)] < s.start[static_cast<std::size_t>(b)];
    });
    for (std::size_t k = 0; k + 1 < ops.size(); ++k) {
      int a = ops[k], b = ops[k + 1];
      if (s.start[static_cast<std::size_t>(a)] + inst.op(a).duration >
          s.start[static_cast<std::size_t>(b)]) {
        const OpRef ra = inst.op_ref(a), rb = inst.op_ref(b);
        throw FeasibilityError("machine " + std::to_string(m) + " overlap between job " +
                               std::to_string(ra.job) + " op " + std::to_string(ra.op) +
                               " and job " + std::to_string(rb.job) + " op " +
                               std::to_string(rb.op));
      }
    }
  }

  long long value = 0;
  for (int j = 0; j < inst.job_count(); ++j) {
    const Job& job = inst.job(j);
    const int last = static_cast<int>(job.ops.size()) - 1;
    const long long completion = s.at(inst, j, last) + job.ops[static_cast<std::size_t>(last)].duration;
    switch (obj) {
      case Objective::Cmax:
        value = std::max(value, completion);
        break;
      case Objective::Tmax:
        value = std::max(value, std::max<long long>(completion - job.due, 0));
        break;
      case Objective::Twt:
        value += job.weight * std::max<long long>(completion - job.due, 0);
        break;
    }
  }
  return value;
}

namespace {

// Earliest (left-shifted) schedule of a fixed per-machine ordering, or
// nullopt when the combined precedence graph is cyclic.
std::optional<Schedule> left_shift(const JssInstance& inst,
                                   const std::vector<std::vector<int>>& machine_order) {
  const int n = inst.op_count();
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  std::vector<int> job_succ(static_cast<std::size_t>(n), -1);
  std::vector<int> mach_succ(static_cast<std::size_t>(n), -1);
  std::vector<int> start(static_cast<std::size_t>(n), 0);

  for (int j = 0; j < inst.job_count(); ++j) {
    const Job& job = inst.job(j);
    start[static_cast<std::size_t>(inst.flat_id(j, 0))] = job.release;
    for (int i = 0; i + 1 < static_cast<int>(job.ops.size()); ++i) {
      job_succ[static_cast<std::size_t>(inst.flat_id(j, i))] = inst.flat_id(j, i + 1);
      ++indegree[static_cast<std::size_t>(inst.flat_id(j, i + 1))];
    }
  }
  for (const auto& order : machine_order) {
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      mach_succ[static_cast<std::size_t>(order[k])] = order[k + 1];
      ++indegree[static_cast<std::size_t>(order[k + 1])];
    }
  }

  std::vector<int> queue;
  queue.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    if (indegree[static_cast<std::size_t>(v)] == 0) queue.push_back(v);

  int processed = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    ++processed;
    const int finish = start[static_cast<std::size_t>(v)] + inst.op(v).duration;
    for (int succ : {job_succ[static_cast<std::size_t>(v)], mach_succ[static_cast<std::size_t>(v)]}) {
      if (succ < 0) continue;
      auto& s = start[static_cast<std::size_t>(succ)];
      s = std::max(s, finish);
      if (--indegree[static_cast<std::size_t>(succ)] == 0) queue.push_back(succ);
    }
  }
  if (processed != n) return std::nullopt;
  return Schedule{std::move(start)};
}

}  // namespace

BruteForceResult brute_force_optimum(const JssInstance& inst, Objective obj) {
  double combos = 1;
  for (int m = 0; m < inst.machine_count(); ++m) {
    std::size_t k = inst.machine_ops(m).size();
    for (std::size_t i = 2; i <= k; ++i) combos *= static_cast<double>(i);
    if (combos > 1e7) throw SizeError("instance too large for exhaustive enumeration");
  }

  std::vector<std::vector<int>> order;
  order.reserve(static_cast<std::size_t>(inst.machine_count()));
  for (int m = 0; m < inst.machine_count(); ++m) order.push_back(inst.machine_ops(m));

  std::optional<BruteForceResult> best;
  auto consider = [&] {
    auto schedule = left_shift(inst, order);
    if (!schedule) return;
    long long value = evaluate(inst, *schedule, obj);
    if (!best || value < best->value) best = BruteForceResult{value, std::move(*schedule)};
  };

  // Odometer over per-machine permutations; each level runs a full
  // next_permutation cycle of its machine's operation list.
  auto recurse = [&](auto&& self, int m) -> void {
    if (m == inst.machine_count()) {
      consider();
      return;
    }
    auto& slot = order[static_cast<std::size_t>(m)];
    std::sort(slot.begin(), slot.end());
    do {
      self(self, m + 1);
    } while (std::next_permutation(slot.begin(), slot.end()));
  };
  recurse(recurse, 0);

  if (!best) throw std::logic_error("no acyclic machine ordering found");
  return std::move(*best);
}

}  // namespace jss
