// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace bp {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for n < 2.
double sample_sd(std::span<const double> xs);
/// Linear-interpolation quantile (R type 7). xs need not be sorted.
double quantile(std::span<const double> xs, double q);

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  bool operator==(const FiveNumber&) const = default;
};

FiveNumber five_number(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);
/// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);
/// Inverse CDF, p in (0, 1).
double student_t_quantile(double p, double df);

struct PairedTTest {
  double t = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  /// Set when the differences have zero variance but nonzero mean.
  bool degenerate = false;
  bool operator==(const PairedTTest&) const = default;
};

/// Student's paired t-test on d = a - b. Requires equal lengths, n >= 2.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

struct MeanInterval {
  double mean = 0, sd = 0, lower = 0, upper = 0;
  bool operator==(const MeanInterval&) const = default;
};

/// Mean, sample sd and the two-sided t-interval for the mean.
MeanInterval t_interval(std::span<const double> xs, double level = 0.95);

}  // namespace bp
