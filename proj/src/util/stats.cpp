#include "jss/util/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jss {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double sign_test_p(long long wins, long long losses) {
  const long long n = wins + losses;
  if (n == 0) return 1.0;
  const long long k = std::min(wins, losses);
  // P(X <= k) for X ~ Binomial(n, 1/2), via log binomial coefficients.
  double cdf = 0;
  for (long long i = 0; i <= k; ++i) {
    const double log_c = std::lgamma(static_cast<double>(n) + 1) -
                         std::lgamma(static_cast<double>(i) + 1) -
                         std::lgamma(static_cast<double>(n - i) + 1);
    cdf += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, 2.0 * cdf);
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's algorithm).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 200;
  constexpr double kEps = 3e-12;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double paired_t_test_p(std::span<const double> diffs) {
  const std::size_t n = diffs.size();
  if (n < 2) return 1.0;
  const double m = mean(diffs);
  const double sd = sample_std(diffs);
  if (sd == 0.0) return m == 0.0 ? 1.0 : 0.0;
  const double t = m / (sd / std::sqrt(static_cast<double>(n)));
  const double df = static_cast<double>(n - 1);
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

}  // namespace jss
