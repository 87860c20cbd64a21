#include "mifb/localrate.hpp"

#include "mifb/errors.hpp"
#include "mifb/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace mifb {

std::optional<long> detect_identification(const RunTrace& trace,
                                          const ActivitySignature& target) {
  const auto& records = trace.records;
  if (records.empty()) return std::nullopt;

  // Find the start of the final run of matches.
  long run_start = -1;
  for (std::size_t j = 0; j < records.size(); ++j) {
    if (records[j].activity == target) {
      if (run_start < 0) run_start = records[j].k;
    } else {
      run_start = -1;
    }
  }
  if (run_start < 0) return std::nullopt;
  const long last_k = records.back().k;
  if (last_k - run_start + 1 < 5) return std::nullopt;  // demand a stable tail
  return run_start;
}

namespace {

/// Companion assembly from the first block row [m0 ... ms] with identity
/// sub-diagonal blocks.
Matrix assemble_companion(const std::vector<Matrix>& row, Index t) {
  const auto s = static_cast<Index>(row.size()) - 1;
  Matrix m = Matrix::Zero((s + 1) * t, (s + 1) * t);
  for (Index j = 0; j <= s; ++j) m.block(0, j * t, t, t) = row[static_cast<std::size_t>(j)];
  for (Index j = 0; j < s; ++j) {
    m.block((j + 1) * t, j * t, t, t) = Matrix::Identity(t, t);
  }
  return m;
}

}  // namespace

RateReport build_reduced_matrices(const CompositeProblem& problem, const Vector& x_star,
                                  double gamma, const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("build_reduced_matrices: a and b sizes differ");
  if (!problem.smooth.hessian_action) {
    throw CapabilityError("build_reduced_matrices: problem lacks a Hessian action");
  }
  const Index s = a.size();

  const ManifoldInfo manifold = problem.penalty->manifold_at(x_star);
  const Matrix& basis = manifold.tangent_basis;
  const Index t = basis.cols();
  if (t == 0) throw RankDeficiencyError("build_reduced_matrices: empty tangent space");

  RateReport report;
  report.tangent_dim = t;

  Matrix hb(x_star.size(), t);
  Matrix rb(x_star.size(), t);
  for (Index j = 0; j < t; ++j) {
    hb.col(j) = problem.smooth.hessian_action(x_star, basis.col(j));
    rb.col(j) = problem.penalty->riemannian_hessian_action(x_star, basis.col(j));
  }
  const Matrix h_raw = gamma * (basis.transpose() * hb);
  report.h_red = 0.5 * (h_raw + h_raw.transpose());
  report.g_red = Matrix::Identity(t, t) - report.h_red;
  const Matrix q_raw = gamma * (basis.transpose() * rb);
  report.q_red = 0.5 * (q_raw + q_raw.transpose());

  const Matrix iq = Matrix::Identity(t, t) + report.q_red;
  Eigen::FullPivLU<Matrix> lu(iq);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw RankDeficiencyError("build_reduced_matrices: I + Q is numerically singular");
  }
  report.p_red = lu.inverse();

  const Matrix pg = report.p_red * report.g_red;
  std::vector<Matrix> row(static_cast<std::size_t>(s) + 1);
  row[0] = (a[0] - b[0]) * report.p_red + (1.0 + b[0]) * pg;
  for (Index i = 1; i < s; ++i) {
    row[static_cast<std::size_t>(i)] =
        -((a[i - 1] - a[i]) - (b[i - 1] - b[i])) * report.p_red - (b[i - 1] - b[i]) * pg;
  }
  row[static_cast<std::size_t>(s)] = -(a[s - 1] - b[s - 1]) * report.p_red - b[s - 1] * pg;
  report.m_comp = assemble_companion(row, t);

  report.rho_m = spectral_radius(report.m_comp);
  std::tie(report.tau, report.ri_ok) = tau_and_ri(problem, x_star, manifold);
  report.q_psd_ok = check_q_psd(report.q_red);
  if (report.tau * gamma > 0 && report.tau * gamma < 1) {
    std::tie(report.rho_star_s1, report.rho_star_s2) =
        optimal_rate_formulas(report.tau, gamma);
  }
  if (problem.smooth.smoothness_gap && problem.smooth.smoothness_gap(x_star) < 1e-6) {
    report.c2_advisory = true;
  }
  return report;
}

double spectral_radius(const Matrix& m) {
  double rho = 0.0;
  for (const auto& ev : eigenvalues(m)) rho = std::max(rho, std::abs(ev));
  return rho;
}

std::pair<double, bool> tau_and_ri(const CompositeProblem& problem, const Vector& x_star,
                                   const ManifoldInfo& manifold) {
  if (!problem.smooth.hessian_action) {
    throw CapabilityError("tau_and_ri: problem lacks a Hessian action");
  }
  const Matrix& basis = manifold.tangent_basis;
  const Index t = basis.cols();
  Matrix hb(x_star.size(), t);
  for (Index j = 0; j < t; ++j) {
    hb.col(j) = problem.smooth.hessian_action(x_star, basis.col(j));
  }
  const Matrix reduced_raw = basis.transpose() * hb;
  const Matrix reduced = 0.5 * (reduced_raw + reduced_raw.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> dec(reduced, Eigen::EigenvaluesOnly);
  const double tau = dec.eigenvalues().minCoeff();
  return {tau, tau > 1e-10};
}

std::pair<double, double> optimal_rate_formulas(double tau, double gamma) {
  const double tg = tau * gamma;
  if (!(tg > 0 && tg < 1)) {
    throw InvalidParameterError("optimal_rate_formulas: tau * gamma must lie in ]0, 1[");
  }
  return {1.0 - std::sqrt(1.0 - tg), 1.0 - std::cbrt(1.0 - tg)};
}

RateFit fit_observed_rate(const RunTrace& trace, long identification_iter) {
  if (identification_iter < 0) {
    throw InsufficientDataError("fit_observed_rate: identification iteration unknown");
  }
  // Window: [K + 5, last k above the 1e-12 machine-precision floor].
  long last_above = -1;
  for (const auto& rec : trace.records) {
    if (rec.k >= identification_iter + 5 && std::isfinite(rec.dist_to_ref) &&
        rec.dist_to_ref > 1e-12) {
      last_above = rec.k;
    }
  }
  std::vector<std::pair<long, double>> points;
  for (const auto& rec : trace.records) {
    if (rec.k < identification_iter + 5 || rec.k > last_above) continue;
    if (!std::isfinite(rec.dist_to_ref)) {
      throw InsufficientDataError("fit_observed_rate: trace has no recorded distances");
    }
    if (rec.dist_to_ref > 0) points.emplace_back(rec.k, std::log(rec.dist_to_ref));
  }
  if (points.size() < 10) {
    throw InsufficientDataError("fit_observed_rate: fewer than 10 usable points");
  }

  double sk = 0, sv = 0, skk = 0, skv = 0;
  const auto n = static_cast<double>(points.size());
  for (const auto& [k, v] : points) {
    sk += static_cast<double>(k);
    sv += v;
    skk += static_cast<double>(k) * static_cast<double>(k);
    skv += static_cast<double>(k) * v;
  }
  const double slope = (n * skv - sk * sv) / (n * skk - sk * sk);

  RateFit fit;
  fit.rho = std::exp(slope);
  fit.begin = points.front().first;
  fit.end = points.back().first;
  return fit;
}

bool check_q_psd(const Matrix& q) {
  if (q.rows() != q.cols()) throw ShapeError("check_q_psd: Q is not square");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw SymmetryError("check_q_psd: Q is asymmetric beyond 1e-8");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> dec(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
  return dec.eigenvalues().minCoeff() >= -1e-10;
}

double symmetric_rho(const Matrix& h_red, const Vector& a) {
  const Index s = a.size();
  Eigen::SelfAdjointEigenSolver<Matrix> dec(0.5 * (h_red + h_red.transpose()),
                                            Eigen::EigenvaluesOnly);
  double rho = 0.0;
  // With b = a and Q = 0 every companion block is a scalar multiple of G,
  // so M block-diagonalizes in the eigenbasis of G into scalar companions.
  Matrix comp = Matrix::Zero(s + 1, s + 1);
  comp.block(1, 0, s, s).setIdentity();
  for (Index e = 0; e < dec.eigenvalues().size(); ++e) {
    const double g = 1.0 - dec.eigenvalues()[e];
    comp(0, 0) = (1.0 + a[0]) * g;
    for (Index i = 1; i < s; ++i) comp(0, i) = -(a[i - 1] - a[i]) * g;
    comp(0, s) = -a[s - 1] * g;
    rho = std::max(rho, spectral_radius(comp));
  }
  return rho;
}

InertiaOpt optimize_inertia(const Matrix& h_red, int s, const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidParameterError("optimize_inertia: empty grid");
  if (s < 1 || s > 2) throw InvalidParameterError("optimize_inertia: s must be 1 or 2");
  for (double g : grid) {
    if (!(g > -1.0 && g < 1.0)) {
      throw InvalidParameterError("optimize_inertia: grid values must lie in ]-1, 1[");
    }
  }

  InertiaOpt best;
  best.a = Vector::Zero(s);
  best.rho = std::numeric_limits<double>::infinity();
  Vector a(s);
  const auto consider = [&](const Vector& cand) {
    const double rho = symmetric_rho(h_red, cand);
    const bool better = rho < best.rho - 1e-15 ||
                        (std::abs(rho - best.rho) <= 1e-15 && cand.norm() < best.a.norm());
    if (better) {
      best.rho = rho;
      best.a = cand;
    }
  };
  if (s == 1) {
    for (double a0 : grid) {
      a[0] = a0;
      consider(a);
    }
  } else {
    for (double a0 : grid) {
      for (double a1 : grid) {
        a[0] = a0;
        a[1] = a1;
        consider(a);
      }
    }
  }
  return best;
}

}  // namespace mifb
