#include "mifb/solver.hpp"

#include "mifb/linalg.hpp"
#include "mifb/params.hpp"

#include <fmt/format.h>

#include <cmath>
#include <deque>

namespace mifb {

void InertialSchedule::validate(double lipschitz) const {
  if (a.size() != b.size()) throw ShapeError("schedule: a and b sizes differ");
  if (a.size() < 1) throw InvalidParameterError("schedule: memory depth s must be >= 1");
  for (Index i = 0; i < a.size(); ++i) {
    if (!(a[i] > -1.0 && a[i] <= 2.0) || !(b[i] > -1.0 && b[i] <= 2.0)) {
      throw InvalidParameterError(
          fmt::format("schedule '{}': coefficients must lie in ]-1, 2]", name));
    }
  }
  if (!(gamma > 0.0 && gamma < 1.0 / lipschitz)) {
    throw InvalidParameterError(
        fmt::format("schedule '{}': gamma must lie in ]0, 1/L[ = ]0, {}[", name, 1.0 / lipschitz));
  }
}

Vector subgradient_residual(const CompositeProblem& problem, double gamma, const Vector& y_a,
                            const Vector& y_b, const Vector& x_next) {
  return (y_a - x_next) / gamma - problem.smooth.gradient(y_b) +
         problem.smooth.gradient(x_next);
}

RunTrace mifb_solve(const CompositeProblem& problem, const InertialSchedule& schedule,
                    const Vector& x0, const SolveOptions& opts) {
  if (x0.size() != problem.dimension) throw ShapeError("mifb_solve: x0 dimension mismatch");
  if (!all_finite(x0)) throw InvalidParameterError("mifb_solve: x0 has non-finite entries");
  if (opts.tol_delta <= 0) throw InvalidParameterError("mifb_solve: tol_delta must be > 0");
  if (opts.max_iter < 1) throw InvalidParameterError("mifb_solve: max_iter must be >= 1");
  const double lipschitz = problem.smooth.lipschitz;
  schedule.validate(lipschitz);
  if (opts.reference && opts.reference->size() != problem.dimension) {
    throw ShapeError("mifb_solve: reference dimension mismatch");
  }

  const Index s = schedule.s();
  const double gamma = schedule.gamma;
  const bool fb_path = schedule.is_fb() && !schedule.online_cap;

  // Descent-monitor constants from the base coefficients; online capping only
  // shrinks |a_i|, so these stay upper bounds.
  double beta_lower = 0.0;
  Vector alpha_bar;
  if (opts.monitor_descent) {
    double mu = opts.monitor_mu;
    double nu = opts.monitor_nu;
    if (mu <= 0 || nu <= 0) {
      std::tie(mu, nu) = stationary_mu_nu(schedule.a, schedule.b, lipschitz);
    }
    const FeasibilityReport report =
        delta_report(gamma, schedule.a, schedule.b, mu, nu, lipschitz);
    beta_lower = report.beta_lower;
    alpha_bar = report.alpha_bar;
  }

  RunTrace trace;
  trace.schedule = schedule;
  trace.seed = problem.seed;

  // History x_k, x_{k-1}, ..., x_{k-s} (front is newest) and the matching
  // displacement norms Delta_k, ..., Delta_{k-s+1}.
  std::deque<Vector> history(static_cast<std::size_t>(s) + 1, x0);
  std::deque<double> deltas(static_cast<std::size_t>(s), 0.0);

  double phi_prev = problem.objective(x0);
  {
    IterationRecord first;
    first.k = 0;
    first.phi = phi_prev;
    first.delta = 0.0;
    first.activity = problem.penalty->signature_of(x0);
    if (opts.reference) first.dist_to_ref = (x0 - *opts.reference).norm();
    trace.records.push_back(std::move(first));
  }

  Vector y_a(problem.dimension), y_b(problem.dimension);
  for (long k = 0; k < opts.max_iter; ++k) {
    Vector a_k = schedule.a;
    Vector b_k = schedule.b;
    if (schedule.online_cap && k >= 1) {
      a_k = online_cap(k, {deltas.begin(), deltas.end()}, schedule.cap_c, schedule.cap_q,
                       schedule.a);
      b_k = a_k;
    }

    const Vector& x_k = history.front();
    if (fb_path) {
      y_a = x_k;
    } else {
      y_a = x_k;
      y_b = x_k;
      for (Index i = 0; i < s; ++i) {
        const Vector step = history[static_cast<std::size_t>(i)] -
                            history[static_cast<std::size_t>(i) + 1];
        y_a += a_k[i] * step;
        y_b += b_k[i] * step;
      }
    }
    const Vector& y_b_ref = fb_path ? x_k : y_b;

    const Vector grad_b = problem.smooth.gradient(y_b_ref);
    auto prox = problem.penalty->prox_with_signature(y_a - gamma * grad_b, gamma);
    Vector& x_next = prox.point;

    const double delta = (x_next - x_k).norm();
    if (!all_finite(x_next) || !std::isfinite(delta)) {
      trace.final_point = x_k;
      throw DivergenceError(
          fmt::format("mifb_solve: non-finite iterate at k={} (schedule '{}')", k + 1,
                      schedule.name),
          std::move(trace));
    }

    IterationRecord rec;
    rec.k = k + 1;
    rec.delta = delta;
    rec.phi = problem.smooth.value(x_next) + problem.penalty->value_from_signature(prox.signature);
    rec.activity = std::move(prox.signature);
    if (opts.reference) rec.dist_to_ref = (x_next - *opts.reference).norm();

    if (opts.monitor_residual) {
      const Vector g = (y_a - x_next) / gamma - grad_b + problem.smooth.gradient(x_next);
      rec.resid = g.norm();
      double bound = (1.0 / gamma + lipschitz) * delta;
      for (Index i = 0; i < s; ++i) {
        bound += (std::abs(a_k[i]) / gamma + std::abs(b_k[i])) *
                 deltas[static_cast<std::size_t>(i)];
      }
      rec.resid_slack = rec.resid - bound;
      if (opts.enforce_residual && rec.resid_slack > 1e-10) {
        throw MonitorFailureError(
            fmt::format("residual bound violated at k={} (slack={})", k + 1, rec.resid_slack),
            k + 1);
      }
    }

    if (opts.monitor_descent) {
      double rhs = phi_prev;
      for (Index i = 0; i < s; ++i) {
        rhs += alpha_bar[i] * deltas[static_cast<std::size_t>(i)] *
               deltas[static_cast<std::size_t>(i)];
      }
      rec.descent_slack = rec.phi + beta_lower * delta * delta - rhs;
      if (opts.enforce_descent && rec.descent_slack > 1e-10) {
        throw MonitorFailureError(
            fmt::format("descent inequality violated at k={} (slack={})", k + 1,
                        rec.descent_slack),
            k + 1);
      }
    }

    phi_prev = rec.phi;
    trace.records.push_back(std::move(rec));

    history.push_front(std::move(x_next));
    history.pop_back();
    deltas.push_front(delta);
    deltas.pop_back();

    if (delta <= opts.tol_delta) {
      trace.reason = StopReason::Converged;
      break;
    }
  }

  trace.final_point = history.front();
  return trace;
}

DescentReport descent_check(const RunTrace& trace, double mu, double nu,
                            const InertialSchedule& schedule, double lipschitz) {
  if (mu <= 0 || nu <= 0) throw InvalidParameterError("descent_check: mu, nu must be > 0");
  const FeasibilityReport fr =
      delta_report(schedule.gamma, schedule.a, schedule.b, mu, nu, lipschitz);
  const Index s = schedule.s();

  DescentReport report;
  // records[j] holds iterate j with Delta_j; Delta_{k-i} = 0 for k-i <= 0.
  for (std::size_t j = 1; j < trace.records.size(); ++j) {
    const auto k = static_cast<long>(j) - 1;  // inequality indexed by k -> k+1
    double rhs = trace.records[j - 1].phi;
    for (Index i = 0; i < s; ++i) {
      const long idx = k - i;
      if (idx >= 1) {
        const double d = trace.records[static_cast<std::size_t>(idx)].delta;
        rhs += fr.alpha_bar[i] * d * d;
      }
    }
    const double lhs = trace.records[j].phi + fr.beta_lower * trace.records[j].delta *
                                                  trace.records[j].delta;
    const double slack = lhs - rhs;
    report.slacks.push_back(slack);
    if (slack > 1e-10 && report.first_violation < 0) {
      report.first_violation = static_cast<long>(j);
      report.ok = false;
    }
  }
  return report;
}

ReferenceSolution reference_solution(const CompositeProblem& problem,
                                     const InertialSchedule& schedule, const Vector& x0) {
  SolveOptions opts;
  opts.tol_delta = 1e-14;
  opts.max_iter = 100000;
  opts.monitor_residual = true;  // final ||g|| is the criticality certificate

  ReferenceSolution ref;
  ref.trace = mifb_solve(problem, schedule, x0, opts);
  ref.x_star = ref.trace.final_point;
  ref.residual_norm = ref.trace.records.back().resid;
  ref.signature = ref.trace.records.back().activity;
  ref.trace.final_residual_norm = ref.residual_norm;
  return ref;
}

}  // namespace mifb
