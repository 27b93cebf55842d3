#include "mdtlab/analysis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdtlab/error.hpp"

namespace mdtlab::analysis {

namespace {

double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw NumericError("incomplete beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double student_t_upper(double t, double df) {
  const double half = 0.5 * student_t_two_sided(t, df);
  return t >= 0.0 ? half : 1.0 - half;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

namespace {

struct Moments {
  double mx, my, sxx, syy, sxy;
};

Moments moments(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("paired sequences differ in length");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return {mx, my, sxx, syy, sxy};
}

double t_p_from_r(double r, int n) {
  const double df = n - 2;
  if (std::fabs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return student_t_two_sided(t, df);
}

}  // namespace

std::optional<Correlation> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = moments(x, y);
  const int n = static_cast<int>(x.size());
  if (n < 3 || m.sxx <= 0.0 || m.syy <= 0.0) return std::nullopt;
  Correlation c;
  c.n = n;
  c.r = std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
  c.p = t_p_from_r(c.r, n);
  return c;
}

std::optional<SimpleFit> simple_regression(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = moments(x, y);
  const int n = static_cast<int>(x.size());
  if (n < 3 || m.sxx <= 0.0) return std::nullopt;
  SimpleFit f;
  f.n = n;
  f.slope = m.sxy / m.sxx;
  f.intercept = m.my - f.slope * m.mx;
  if (m.syy > 0.0) {
    const double r = std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
    f.r2 = r * r;
    f.p = t_p_from_r(r, n);
  } else {
    f.r2 = 0.0;
    f.p = 1.0;
  }
  return f;
}

std::optional<TTest> paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("paired t-test: sequences differ in length");
  if (a.size() < 2) return std::nullopt;
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double var = variance(d);
  if (!(var > 0.0)) return std::nullopt;
  const double n = static_cast<double>(d.size());
  TTest t;
  t.df = n - 1.0;
  t.t = mean(d) / std::sqrt(var / n);
  t.p = student_t_two_sided(t.t, t.df);
  t.p_greater = student_t_upper(t.t, t.df);
  return t;
}

}  // namespace mdtlab::analysis
