#pragma once

#include "mifb/errors.hpp"
#include "mifb/problems.hpp"
#include "mifb/types.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mifb {

/// Inertial coefficients and step size of one MiFB scheme. Coefficients live
/// in ]-1, 2]; convergence additionally needs the feasibility condition
/// (check_theorem22) or the empirical bound plus the online cap.
struct InertialSchedule {
  std::string name{"schedule"};
  Vector a;  // size s
  Vector b;  // size s
  double gamma{0.0};
  std::string rule{"theorem22"};  // "theorem22" | "bound24"
  bool online_cap{false};
  double cap_c{10.0};
  double cap_q{0.1};

  Index s() const { return a.size(); }
  bool is_fb() const { return a.isZero(0.0) && b.isZero(0.0); }

  /// Coefficient box and step-size checks; throws InvalidParameterError.
  void validate(double lipschitz) const;
};

struct SolveOptions {
  long max_iter{10000};
  double tol_delta{1e-10};
  bool monitor_descent{false};   // objective descent inequality
  bool monitor_residual{false};  // subgradient residual bound (one extra gradient/iter)
  /// Constants for the descent monitor; non-positive values select the
  /// stationary (mu*, nu*) of the schedule.
  double monitor_mu{-1.0};
  double monitor_nu{-1.0};
  /// Throw MonitorFailureError on a violation instead of just recording it.
  /// The descent inequality is only guaranteed for schedules satisfying the
  /// feasibility condition, so its enforcement is separate.
  bool enforce_residual{false};
  bool enforce_descent{false};
  /// When set, dist_to_ref is recorded per iteration.
  std::optional<Vector> reference;
};

struct IterationRecord {
  long k{0};
  double phi{0};
  double delta{0};  // ||x_k - x_{k-1}||
  double resid{std::numeric_limits<double>::quiet_NaN()};         // ||g_k||
  double resid_slack{std::numeric_limits<double>::quiet_NaN()};   // ||g_k|| - bound
  double descent_slack{std::numeric_limits<double>::quiet_NaN()};
  double dist_to_ref{std::numeric_limits<double>::quiet_NaN()};
  ActivitySignature activity;
};

enum class StopReason { Converged, MaxIterations };

struct RunTrace {
  std::vector<IterationRecord> records;  // k = 0 (initial point) onward
  Vector final_point;
  StopReason reason{StopReason::MaxIterations};
  InertialSchedule schedule;
  std::uint64_t seed{0};
  double final_residual_norm{std::numeric_limits<double>::quiet_NaN()};
};

/// Iterates became non-finite; carries the trace up to the last finite point.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, RunTrace partial)
      : Error(what), trace(std::move(partial)) {}
  RunTrace trace;
};

/// Run the multi-step inertial forward-backward iteration
///   y_a = x_k + sum_i a_i (x_{k-i} - x_{k-i-1})
///   y_b = x_k + sum_i b_i (x_{k-i} - x_{k-i-1})
///   x_{k+1} = prox_{gamma R}(y_a - gamma grad F(y_b))
/// from a history buffer initialized with s+1 copies of x0, stopping at
/// delta <= tol_delta or max_iter.
RunTrace mifb_solve(const CompositeProblem& problem, const InertialSchedule& schedule,
                    const Vector& x0, const SolveOptions& opts);

/// Subgradient certificate of one accepted iteration:
/// g = (y_a - x_next)/gamma - grad F(y_b) + grad F(x_next).
Vector subgradient_residual(const CompositeProblem& problem, double gamma, const Vector& y_a,
                            const Vector& y_b, const Vector& x_next);

/// Post-hoc check of the objective descent inequality over a trace. slack[k]
/// <= tolerance is the pass condition; first_violation is -1 when none.
struct DescentReport {
  std::vector<double> slacks;
  long first_violation{-1};
  bool ok{true};
};
DescentReport descent_check(const RunTrace& trace, double mu, double nu,
                            const InertialSchedule& schedule, double lipschitz);

/// High-accuracy solve (tol 1e-14, 1e5 iterations) standing in for the limit
/// point; final_residual_norm is the criticality certificate.
struct ReferenceSolution {
  Vector x_star;
  double residual_norm{std::numeric_limits<double>::quiet_NaN()};
  ActivitySignature signature;
  RunTrace trace;
};
ReferenceSolution reference_solution(const CompositeProblem& problem,
                                     const InertialSchedule& schedule, const Vector& x0);

}  // namespace mifb
