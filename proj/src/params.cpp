#include "mifb/params.hpp"

#include "mifb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mifb {

FeasibilityReport delta_report(double gamma_hi, const Vector& a, const Vector& b, double mu,
                               double nu, double L, double gamma_lo) {
  if (mu <= 0 || nu <= 0) throw InvalidParameterError("delta_report: mu, nu must be > 0");
  if (gamma_hi <= 0) throw InvalidParameterError("delta_report: gamma must be > 0");
  if (a.size() != b.size()) throw ShapeError("delta_report: a and b sizes differ");
  if (gamma_lo < 0) gamma_lo = gamma_hi;

  const auto s = static_cast<double>(a.size());
  FeasibilityReport report;
  report.mu = mu;
  report.nu = nu;
  report.beta_lower = (1.0 - gamma_hi * L - mu - nu * gamma_hi) / (2.0 * gamma_hi);
  report.alpha_bar.resize(a.size());
  for (Index i = 0; i < a.size(); ++i) {
    report.alpha_bar[i] =
        s * a[i] * a[i] / (2.0 * gamma_lo * mu) + s * b[i] * b[i] * L * L / (2.0 * nu);
  }
  report.delta = report.beta_lower - report.alpha_bar.sum();
  report.feasible = report.delta > 0;
  if (a.size() == 1) {
    report.geometry = "ellipsoid s=1";
  } else if (a == b) {
    report.geometry = "ball symmetric";
  } else {
    report.geometry = "general";
  }
  return report;
}

std::pair<double, double> stationary_mu_nu(const Vector& a, const Vector& b, double L) {
  constexpr double kFloor = 1e-9;
  const auto s = static_cast<double>(a.size());
  const double mu_star = std::max(kFloor, std::sqrt(s * a.squaredNorm()));
  const double nu_star = std::max(kFloor, L * std::sqrt(s * b.squaredNorm()));
  return {mu_star, nu_star};
}

bool ellipsoid_check(double a0, double b0, double gamma, double mu, double nu, double L) {
  const double beta = (1.0 - gamma * L - mu - nu * gamma) / (2.0 * gamma);
  return a0 * a0 / (2.0 * gamma * mu) + b0 * b0 / (2.0 * nu / (L * L)) < beta;
}

bool ball_check(const Vector& a, double gamma, double mu, double nu, double L) {
  const auto s = static_cast<double>(a.size());
  const double beta = (1.0 - gamma * L - mu - nu * gamma) / (2.0 * gamma);
  return s * (1.0 / (2.0 * gamma * mu) + L * L / (2.0 * nu)) * a.squaredNorm() < beta;
}

OpenInterval empirical_bound(double gamma, double L) {
  if (!(gamma > 0 && gamma < 1.0 / L)) {
    throw InvalidParameterError("empirical_bound: gamma must lie in ]0, 1/L[");
  }
  const double denom = std::abs(2.0 * gamma - 1.0 / L);
  // At gamma = 1/(2L) the ratio diverges; min caps the bound at 1.
  const double ratio = denom == 0.0 ? std::numeric_limits<double>::infinity()
                                    : (1.0 / L - gamma) / denom;
  return {0.0, std::min(1.0, ratio)};
}

Vector online_cap(long k, const std::vector<double>& delta_window, double c, double q,
                  const Vector& base_a) {
  if (c <= 0 || q <= 0) throw InvalidParameterError("online_cap: c, q must be > 0");
  if (k < 1) throw InvalidParameterError("online_cap: k must be >= 1");
  double window = 0.0;
  for (double d : delta_window) window += d;
  const double sum_a = base_a.sum();
  if (window <= 0.0 || sum_a <= 0.0) return base_a;  // c_k = +inf, no cap
  const double ck = c / (std::pow(static_cast<double>(k), 1.0 + q) * window);
  const double scale = std::min(1.0, ck / sum_a);
  return base_a * scale;
}

FeasibilityReport check_theorem22(const Vector& a, const Vector& b, double gamma, double L) {
  const auto [mu_star, nu_star] = stationary_mu_nu(a, b, L);
  return delta_report(gamma, a, b, mu_star, nu_star, L);
}

double theorem22_sum_bound(double gamma, double L) {
  return (1.0 - gamma * L) / (2.0 * (1.0 + gamma * L));
}

}  // namespace mifb
