#pragma once

#include "mifb/problems.hpp"
#include "mifb/solver.hpp"
#include "mifb/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mifb {

/// Local linear-rate analysis at a critical point x*: reduced matrices on an
/// orthonormal tangent basis B (t columns) of the active manifold,
///   H = gamma B^T grad^2 F(x*) B,  G = I - H,
///   Q = gamma B^T (Riemannian Hessian of R) B,  P = (I + Q)^{-1},
/// the block companion matrix M of the linearized error recursion, its
/// spectral radius, and the predicted versus observed rates.
struct RateReport {
  long identification_iter{-1};  // -1: never stabilized
  Index tangent_dim{0};
  Matrix h_red, g_red, q_red, p_red;
  Matrix m_comp;  // (s+1)t x (s+1)t
  double rho_m{std::numeric_limits<double>::quiet_NaN()};
  double tau{std::numeric_limits<double>::quiet_NaN()};
  bool ri_ok{false};
  bool q_psd_ok{false};
  double rho_star_s1{std::numeric_limits<double>::quiet_NaN()};
  double rho_star_s2{std::numeric_limits<double>::quiet_NaN()};
  double observed_rate{std::numeric_limits<double>::quiet_NaN()};
  long fit_begin{-1}, fit_end{-1};
  /// Set when the loss is only piecewise C^2 and x* sits within 1e-6 of a
  /// kink; the linear prediction is then advisory.
  bool c2_advisory{false};
};

/// Smallest K such that every recorded activity signature from K on equals
/// the target, requiring at least 5 consecutive matches before the trace
/// ends; nullopt if the signature never stabilizes on the target.
std::optional<long> detect_identification(const RunTrace& trace,
                                          const ActivitySignature& target);

/// Assemble the reduced matrices and the companion M for the scheme
/// (a, b, gamma) at x*. Throws CapabilityError without a Hessian action and
/// RankDeficiencyError when I + Q is numerically singular.
RateReport build_reduced_matrices(const CompositeProblem& problem, const Vector& x_star,
                                  double gamma, const Vector& a, const Vector& b);

double spectral_radius(const Matrix& m);

/// tau = smallest eigenvalue of B^T grad^2 F(x*) B and the restricted
/// injectivity flag tau > 1e-10.
std::pair<double, bool> tau_and_ri(const CompositeProblem& problem, const Vector& x_star,
                                   const ManifoldInfo& manifold);

/// Optimal local rates of the 1- and 2-step schemes at fixed step:
/// rho*_1 = 1 - sqrt(1 - tau gamma), rho*_2 = 1 - cbrt(1 - tau gamma).
std::pair<double, double> optimal_rate_formulas(double tau, double gamma);

/// Least-squares slope of log ||x_k - x*|| over k in [K+5, last k above the
/// 1e-12 floor]; requires >= 10 usable points and recorded distances.
struct RateFit {
  double rho{std::numeric_limits<double>::quiet_NaN()};
  long begin{-1}, end{-1};
};
RateFit fit_observed_rate(const RunTrace& trace, long identification_iter);

/// lambda_min(Q) >= -1e-10; throws SymmetryError when Q is asymmetric
/// beyond 1e-8.
bool check_q_psd(const Matrix& q);

/// Exhaustive grid minimization of rho(M) over symmetric coefficients
/// (b = a, Q = 0); ties break toward smaller ||a||. The reduction to scalar
/// companions over the spectrum of H is exact in this regime.
struct InertiaOpt {
  Vector a;
  double rho{std::numeric_limits<double>::quiet_NaN()};
};
InertiaOpt optimize_inertia(const Matrix& h_red, int s, const std::vector<double>& grid);

/// rho(M) for symmetric coefficients via the scalar-companion reduction.
double symmetric_rho(const Matrix& h_red, const Vector& a);

}  // namespace mifb
