#pragma once

#include "jss/instance.hpp"

namespace jss::testing {

// Two jobs, two machines:
//   job 0: r=0 d=10 w=1, route (M0,3) (M1,2)
//   job 1: r=0 d=8  w=2, route (M1,2) (M0,4)
// Cmax optimum 7 with starts (0,3,0,3) in flat order.
inline JssInstance t1() {
  Job j0;
  j0.release = 0;
  j0.due = 10;
  j0.weight = 1;
  j0.ops = {Operation{0, 3}, Operation{1, 2}};
  Job j1;
  j1.release = 0;
  j1.due = 8;
  j1.weight = 2;
  j1.ops = {Operation{1, 2}, Operation{0, 4}};
  return JssInstance({j0, j1}, 2);
}

// t1 with job 1 due date tightened to 6; TWT optimum is 1.
inline JssInstance t2() {
  Job j0;
  j0.release = 0;
  j0.due = 10;
  j0.weight = 1;
  j0.ops = {Operation{0, 3}, Operation{1, 2}};
  Job j1;
  j1.release = 0;
  j1.due = 6;
  j1.weight = 2;
  j1.ops = {Operation{1, 2}, Operation{0, 4}};
  return JssInstance({j0, j1}, 2);
}

inline Schedule t1_cmax_optimum() {
  // flat order: (j0,o0) (j0,o1) (j1,o0) (j1,o1)
  return Schedule{{0, 3, 0, 3}};
}

}  // namespace jss::testing
