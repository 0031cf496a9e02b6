#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "jss/error.hpp"
#include "jss/instance.hpp"

using namespace jss;

TEST_CASE("generate honors the due date allowance rule") {
  const JssInstance inst = generate(2, 2, 1.3, 7);
  for (const Job& job : inst.jobs())
    CHECK(job.due == due_from_allowance(1.3, job.release, job.total_processing()));
}

TEST_CASE("generate builds square instances visiting every machine once") {
  const JssInstance inst = generate(9, 9, 1.3, 1);
  CHECK(inst.op_count() == 81);
  for (const Job& job : inst.jobs()) {
    CHECK(job.ops.size() == 9);
    std::set<int> machines;
    for (const Operation& o : job.ops) machines.insert(o.machine);
    CHECK(machines.size() == 9);
    CHECK(job.weight >= 1);
    CHECK(job.weight <= 10);
    CHECK(job.release >= 0);
    CHECK(job.release <= 112);
    for (const Operation& o : job.ops) {
      CHECK(o.duration >= 1);
      CHECK(o.duration <= 99);
    }
  }
}

TEST_CASE("generate is deterministic in the seed") {
  CHECK(generate(5, 4, 1.3, 42) == generate(5, 4, 1.3, 42));
  CHECK_FALSE(generate(5, 4, 1.3, 42) == generate(5, 4, 1.3, 43));
}

TEST_CASE("generate rejects bad arguments") {
  CHECK_THROWS_AS(generate(0, 2, 1.3, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate(2, 0, 1.3, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate(2, 2, 0.0, 1), std::invalid_argument);
}

TEST_CASE("parse_orlib reads the standard layout") {
  const JssInstance inst = parse_orlib("2 2\n0 3 1 2\n1 2 0 4\n");
  CHECK(inst.job_count() == 2);
  CHECK(inst.machine_count() == 2);
  CHECK(inst.job(0).ops[0].machine == 0);
  CHECK(inst.job(0).ops[0].duration == 3);
  CHECK(inst.job(0).ops[1].machine == 1);
  CHECK(inst.job(0).ops[1].duration == 2);
  CHECK(inst.job(1).ops[0].machine == 1);
  CHECK(inst.job(1).ops[1].duration == 4);
  for (const Job& job : inst.jobs()) {
    CHECK(job.release == 0);
    CHECK(job.due == 0);
    CHECK(job.weight == 1);
  }
}

TEST_CASE("parse_orlib reports errors with line numbers") {
  CHECK_THROWS_AS(parse_orlib(""), ParseError);
  CHECK_THROWS_AS(parse_orlib("1 2\n0 3\n"), ParseError);

  try {
    parse_orlib("2 2\n0 3 1 2\n1 2 0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_orlib("1 2\n0 3 5 2\n");  // machine 5 out of range
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse_orlib("1 2\n0 3 0 2\n");  // duplicate machine in route
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("orlib serialization round trips") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const JssInstance generated = generate(4, 3, 1.3, seed);
    // OR-library format carries no release/due/weight metadata.
    std::vector<Job> stripped_jobs;
    for (Job job : generated.jobs()) {
      job.release = 0;
      job.due = 0;
      job.weight = 1;
      stripped_jobs.push_back(std::move(job));
    }
    const JssInstance stripped(stripped_jobs, generated.machine_count());
    CHECK(parse_orlib(serialize_orlib(stripped)) == stripped);
  }
}

TEST_CASE("native serialization round trips with metadata") {
  for (std::uint64_t seed : {10, 11}) {
    const JssInstance inst = generate(5, 3, 1.3, seed);
    CHECK(parse_native(serialize_native(inst)) == inst);
    CHECK(parse_instance(serialize_native(inst)) == inst);
    CHECK(parse_instance(serialize_orlib(inst)).job_count() == 5);
  }
}

TEST_CASE("schedule files round trip") {
  const JssInstance inst = testing::t1();
  const Schedule s = testing::t1_cmax_optimum();
  CHECK(parse_schedule(inst, serialize_schedule(inst, s)).start == s.start);
  CHECK_THROWS_AS(parse_schedule(inst, "sol-v1 9 9\n"), ParseError);
}

TEST_CASE("evaluate computes objectives on the worked example") {
  const JssInstance inst = testing::t1();
  const Schedule s = testing::t1_cmax_optimum();
  CHECK(evaluate(inst, s, Objective::Cmax) == 7);
  CHECK(evaluate(inst, s, Objective::Tmax) == 0);  // C1=5<=10, C2=7<=8
  CHECK(evaluate(inst, s, Objective::Twt) == 0);
}

TEST_CASE("evaluate rejects infeasible schedules by name") {
  const JssInstance inst = testing::t1();

  // o22 on M0 during [2,6) overlaps o11 on M0 during [0,3).
  const Schedule overlap{{0, 3, 0, 2}};
  CHECK_THROWS_WITH_AS(evaluate(inst, overlap, Objective::Cmax),
                       doctest::Contains("overlap"), FeasibilityError);

  const Schedule precedence{{0, 1, 0, 3}};  // job 0 op 1 starts before op 0 ends
  CHECK_THROWS_WITH_AS(evaluate(inst, precedence, Objective::Cmax),
                       doctest::Contains("precedence"), FeasibilityError);

  Job late;
  late.release = 5;
  late.ops = {Operation{0, 1}};
  const JssInstance released({late}, 1);
  CHECK_THROWS_WITH_AS(evaluate(released, Schedule{{0}}, Objective::Cmax),
                       doctest::Contains("release"), FeasibilityError);

  CHECK_THROWS_AS(evaluate(inst, Schedule{{0, 3}}, Objective::Cmax), std::invalid_argument);
}

TEST_CASE("brute force optimum matches hand enumeration") {
  const JssInstance inst = testing::t1();
  const auto cmax = brute_force_optimum(inst, Objective::Cmax);
  CHECK(cmax.value == 7);
  CHECK(evaluate(inst, cmax.schedule, Objective::Cmax) == 7);

  CHECK(brute_force_optimum(inst, Objective::Tmax).value == 0);
  CHECK(brute_force_optimum(testing::t2(), Objective::Twt).value == 1);
}

TEST_CASE("brute force schedule is consistent with its value") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const JssInstance inst = generate(3, 3, 1.3, seed);
    for (Objective obj : {Objective::Cmax, Objective::Tmax, Objective::Twt}) {
      const auto best = brute_force_optimum(inst, obj);
      CHECK(evaluate(inst, best.schedule, obj) == best.value);
    }
    // Cmax is bounded below by the longest job.
    long long bound = 0;
    for (const Job& job : inst.jobs())
      bound = std::max(bound, static_cast<long long>(job.release + job.total_processing()));
    CHECK(brute_force_optimum(inst, Objective::Cmax).value >= bound);
  }
}

TEST_CASE("brute force refuses oversized instances") {
  std::vector<Job> jobs;
  for (int j = 0; j < 12; ++j) {
    Job job;
    job.ops = {Operation{0, 1}};
    jobs.push_back(job);
  }
  const JssInstance inst(jobs, 1);  // 12! orderings on one machine
  CHECK_THROWS_AS(brute_force_optimum(inst, Objective::Cmax), SizeError);
}

TEST_CASE("instance invariants are validated at construction") {
  Job bad_machine;
  bad_machine.ops = {Operation{3, 1}};
  CHECK_THROWS_AS(JssInstance({bad_machine}, 2), std::invalid_argument);

  Job dup;
  dup.ops = {Operation{0, 1}, Operation{0, 2}};
  CHECK_THROWS_AS(JssInstance({dup}, 2), std::invalid_argument);

  Job zero_duration;
  zero_duration.ops = {Operation{0, 0}};
  CHECK_THROWS_AS(JssInstance({zero_duration}, 1), std::invalid_argument);

  Job ok;
  ok.ops = {Operation{0, 1}};
  ok.weight = 0;
  CHECK_THROWS_AS(JssInstance({ok}, 1), std::invalid_argument);
}
