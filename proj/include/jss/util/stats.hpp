#pragma once

#include <span>

namespace jss {

double mean(std::span<const double> xs);
// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
double sample_std(std::span<const double> xs);

// Two-sided paired sign test: wins/losses are the counts of pairs where one
// side is strictly smaller; ties are dropped. Exact binomial p-value.
double sign_test_p(long long wins, long long losses);

// Two-sided paired t-test p-value over the differences; 1.0 when fewer than
// 2 pairs or zero variance.
double paired_t_test_p(std::span<const double> diffs);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

}  // namespace jss
