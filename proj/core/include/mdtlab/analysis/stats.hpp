#pragma once

#include <optional>
#include <vector>

namespace mdtlab::analysis {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Two-sided and upper-tail p-values of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);
double student_t_upper(double t, double df);

double mean(const std::vector<double>& v);
// Sample variance (n - 1).
double variance(const std::vector<double>& v);

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided, H0: r = 0
  int n = 0;
};
// Undefined when either input has zero variance or n < 3.
std::optional<Correlation> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct SimpleFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double p = 1.0;  // slope test
  int n = 0;
};
// y = intercept + slope * x. Undefined when x has zero variance or n < 3.
std::optional<SimpleFit> simple_regression(const std::vector<double>& x, const std::vector<double>& y);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;          // two-sided
  double p_greater = 1.0;  // H1: mean(a - b) > 0
};
// Paired t-test on a - b. Undefined when the differences have zero variance.
std::optional<TTest> paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mdtlab::analysis
