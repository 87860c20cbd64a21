#pragma once

#include "mifb/types.hpp"

#include <utility>
#include <vector>

namespace mifb {

/// Feasibility quantities for a coefficient/step choice:
///   beta_lower = (1 - gamma_hi * L - mu - nu * gamma_hi) / (2 * gamma_hi)
///   alpha_bar[i] = s a_i^2 / (2 gamma_lo mu) + s b_i^2 L^2 / (2 nu)
///   delta = beta_lower - sum_i alpha_bar[i]
/// The scheme's descent analysis requires delta > 0.
struct FeasibilityReport {
  double mu{0}, nu{0};
  double beta_lower{0};
  Vector alpha_bar;
  double delta{0};
  bool feasible{false};
  std::string geometry;  // "ellipsoid s=1" | "ball symmetric" | "general"
};

/// Evaluate the feasibility quantities. gamma_lo < 0 means a constant step
/// (gamma_lo = gamma_hi); otherwise the 1/gamma terms of alpha_bar use the
/// conservative smallest step.
FeasibilityReport delta_report(double gamma_hi, const Vector& a, const Vector& b, double mu,
                               double nu, double L, double gamma_lo = -1.0);

/// Closed-form maximizer of delta over (mu, nu):
///   mu* = sqrt(s * sum a_i^2), nu* = L * sqrt(s * sum b_i^2),
/// floored at 1e-9 when the respective coefficients vanish.
std::pair<double, double> stationary_mu_nu(const Vector& a, const Vector& b, double L);

/// s = 1 geometric form of the feasibility condition: (a0, b0) must lie
/// strictly inside an ellipsoid.
bool ellipsoid_check(double a0, double b0, double gamma, double mu, double nu, double L);

/// Symmetric (b = a) form: a must lie strictly inside a ball. This is the
/// exact restatement of delta > 0, including the memory factor s.
bool ball_check(const Vector& a, double gamma, double mu, double nu, double L);

/// Open interval ]lo, hi[.
struct OpenInterval {
  double lo{0}, hi{0};
  bool contains(double x) const { return x > lo && x < hi; }
};

/// Empirical admissible range for sum_i a_i at a constant step gamma:
/// ]0, min{1, (1/L - gamma) / |2 gamma - 1/L|}[. At gamma = 1/(2L) the ratio
/// diverges and the cap is 1.
OpenInterval empirical_bound(double gamma, double L);

/// Online safeguard for empirically chosen coefficients: scales the base
/// coefficients proportionally so their sum is min{sum a, c_k} with
/// c_k = c / (k^(1+q) * sum of the displacement window); c_k = +inf when the
/// window is zero.
Vector online_cap(long k, const std::vector<double>& delta_window, double c, double q,
                  const Vector& base_a);

/// Feasibility at the stationary (mu*, nu*).
FeasibilityReport check_theorem22(const Vector& a, const Vector& b, double gamma, double L);

/// Largest sum of equal symmetric coefficients admitted by delta > 0 at the
/// stationary (mu*, nu*): (1 - gamma L) / (2 (1 + gamma L)).
double theorem22_sum_bound(double gamma, double L);

}  // namespace mifb
