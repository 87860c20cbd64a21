#include "mifb/problems.hpp"

#include "mifb/errors.hpp"
#include "mifb/linalg.hpp"
#include "mifb/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <utility>

namespace mifb {

namespace {

using nlohmann::json;

Eigen::Map<const Matrix> as_matrix(const Vector& x, Index rows, Index cols) {
  return {x.data(), rows, cols};
}

Vector as_vector(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }
std::vector<double> to_std(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

/// k-sparse vector with support drawn uniformly and nonzeros sign*(1+|N(0,1)|),
/// keeping the entries bounded away from zero.
Vector sparse_ground_truth(RngState& rng, Index n, Index k, std::vector<Index>* support_out) {
  const std::vector<Index> support = sample_without_replacement(rng, n, k);
  Vector x = Vector::Zero(n);
  for (Index idx : support) {
    const double sign = rng.next_below(2) ? 1.0 : -1.0;
    x[idx] = sign * (1.0 + std::abs(rng.next_gaussian()));
  }
  if (support_out) *support_out = support;
  return x;
}

}  // namespace

double lipschitz_constant(const CompositeProblem& problem) {
  return problem.smooth.lipschitz;
}

CompositeProblem make_regression_from_data(const Matrix& a, const Vector& y, double mu) {
  if (a.rows() != y.size()) throw ShapeError("regression: A and y row counts differ");
  const Index n = a.cols();
  const double lips = largest_eigenvalue_sym(
      [&a](const Vector& v) { return Vector(a.transpose() * (a * v)); }, n, 1e-8);

  CompositeProblem problem;
  problem.dimension = n;
  problem.penalty = std::make_shared<L0Penalty>(n, mu);
  problem.smooth.lipschitz = lips;
  problem.smooth.value = [a, y](const Vector& x) { return 0.5 * (y - a * x).squaredNorm(); };
  problem.smooth.gradient = [a, y](const Vector& x) { return Vector(a.transpose() * (a * x - y)); };
  problem.smooth.hessian_action = [a](const Vector&, const Vector& d) {
    return Vector(a.transpose() * (a * d));
  };
  problem.metadata = json{{"kind", "regression_from_data"},
                          {"m", a.rows()},
                          {"n", n},
                          {"mu", mu},
                          {"L", lips}}
                         .dump();
  return problem;
}

CompositeProblem make_sparse_regression(std::uint64_t seed, Index m, Index n, Index k,
                                        double noise_std, double mu) {
  if (m < 1 || n < 1) throw InvalidParameterError("sparse_regression: m, n must be >= 1");
  if (k > n) throw InvalidParameterError("sparse_regression: sparsity k exceeds n");

  RngState rng(seed);
  const Matrix a = gaussian_matrix(rng, m, n);
  std::vector<Index> support;
  const Vector x_ob = sparse_ground_truth(rng, n, k, &support);
  const Vector y_clean = a * x_ob;
  if (noise_std < 0) noise_std = 0.01 * y_clean.norm() / std::sqrt(static_cast<double>(m));
  Vector y = y_clean;
  if (noise_std > 0) y += noise_std * gaussian_vector(rng, m);

  if (mu <= 0) {
    // Default weight tied to L so the hard threshold sqrt(2 gamma mu) sits
    // well inside ]noise floor, 1[ for gamma expressed as a fraction of 1/L:
    // mu = 0.15 L gives threshold sqrt(0.3 frac).
    mu = 0.15 * largest_eigenvalue_sym(
                    [&a](const Vector& v) { return Vector(a.transpose() * (a * v)); }, n, 1e-8);
  }
  CompositeProblem problem = make_regression_from_data(a, y, mu);
  problem.seed = seed;

  json meta{{"kind", "sparse_regression"}, {"seed", seed},     {"m", m},
            {"n", n},                      {"k", k},           {"noise_std", noise_std},
            {"mu", mu},                    {"L", problem.smooth.lipschitz}};
  meta["support_truth"] = support;
  problem.metadata = meta.dump();

  json archive = meta;
  archive["A"] = to_std(a);
  archive["y"] = to_std(y);
  archive["x_ob"] = to_std(x_ob);
  problem.archive = std::make_shared<const std::string>(archive.dump());
  return problem;
}

CompositeProblem make_pcp(std::uint64_t seed, Index n1, Index n2, Index sparsity, Index rank,
                          double noise_std, double mu1, double mu2) {
  if (n1 < 1 || n2 < 1) throw InvalidParameterError("pcp: n1, n2 must be >= 1");
  if (rank > std::min(n1, n2)) throw InvalidParameterError("pcp: rank exceeds min(n1, n2)");
  if (sparsity > n1 * n2) throw InvalidParameterError("pcp: sparsity exceeds n1*n2");

  RngState rng(seed);
  const Index cells = n1 * n2;
  std::vector<Index> support;
  const Vector xs_flat = sparse_ground_truth(rng, cells, sparsity, &support);
  const Matrix p = gaussian_matrix(rng, n1, rank);
  const Matrix q = gaussian_matrix(rng, n2, rank);
  const Matrix x_l = p * q.transpose();
  const Matrix x_s = as_matrix(xs_flat, n1, n2);

  Matrix y = x_s + x_l;
  if (noise_std < 0) noise_std = 0.01 * y.norm() / std::sqrt(static_cast<double>(cells));
  if (noise_std > 0) y += noise_std * gaussian_matrix(rng, n1, n2);

  // Defaults place the two hard thresholds (sqrt(gamma L mu) at L = 2)
  // between the noise floor and the smallest signal scale of each block.
  if (mu1 <= 0) mu1 = 0.3;
  if (mu2 <= 0) mu2 = 80.0;

  CompositeProblem problem;
  problem.dimension = 2 * cells;
  problem.seed = seed;
  std::vector<ProductPenalty::Part> parts;
  parts.emplace_back(std::make_shared<L0Penalty>(cells, mu1), Slice{0, cells});
  parts.emplace_back(std::make_shared<RankPenalty>(n1, n2, mu2), Slice{cells, cells});
  problem.penalty = std::make_shared<ProductPenalty>(std::move(parts), std::vector<Slice>{},
                                                     2 * cells);

  // F depends on the blocks only through their sum; the Hessian is the
  // block operator [[I, I], [I, I]] with spectrum {0, 2}.
  problem.smooth.lipschitz = 2.0;
  problem.smooth.value = [y, n1, n2, cells](const Vector& x) {
    const Matrix sum = as_matrix(x.head(cells), n1, n2) + as_matrix(x.tail(cells), n1, n2);
    return 0.5 * (y - sum).squaredNorm();
  };
  problem.smooth.gradient = [y, n1, n2, cells](const Vector& x) {
    const Matrix resid =
        as_matrix(x.head(cells), n1, n2) + as_matrix(x.tail(cells), n1, n2) - y;
    Vector g(2 * cells);
    g.head(cells) = as_vector(resid);
    g.tail(cells) = g.head(cells);
    return g;
  };
  problem.smooth.hessian_action = [cells](const Vector&, const Vector& d) {
    Vector out(2 * cells);
    out.head(cells) = d.head(cells) + d.tail(cells);
    out.tail(cells) = out.head(cells);
    return out;
  };

  json meta{{"kind", "pcp"},           {"seed", seed}, {"n1", n1},   {"n2", n2},
            {"sparsity", sparsity},    {"rank", rank}, {"mu1", mu1}, {"mu2", mu2},
            {"noise_std", noise_std},  {"L", 2.0}};
  problem.metadata = meta.dump();

  json archive = meta;
  archive["y"] = to_std(y);
  archive["x_s"] = to_std(xs_flat);
  archive["x_l"] = to_std(x_l);
  problem.archive = std::make_shared<const std::string>(archive.dump());
  return problem;
}

CompositeProblem make_sparse_svm(std::uint64_t seed, Index m, Index n, SvmLoss loss, double mu) {
  if (m < 1 || n < 1) throw InvalidParameterError("sparse_svm: m, n must be >= 1");

  RngState rng(seed);
  const Matrix features = gaussian_matrix(rng, m, n);
  const Vector w_hidden = gaussian_vector(rng, n);
  const double b_hidden = rng.next_gaussian();

  Vector labels(m);
  for (Index i = 0; i < m; ++i) {
    labels[i] = (features.row(i).dot(w_hidden) + b_hidden >= 0) ? 1.0 : -1.0;
  }

  // Variable u = (b, x); design matrix rows are (1, z_i).
  Matrix zt(m, n + 1);
  zt.col(0).setOnes();
  zt.rightCols(n) = features;

  const double gram_max = largest_eigenvalue_sym(
      [&zt](const Vector& v) { return Vector(zt.transpose() * (zt * v)); }, n + 1, 1e-8);
  const double scale = 1.0 / static_cast<double>(m);
  const double lips_for_default =
      (loss == SvmLoss::SquaredHinge ? 2.0 : 0.25) * scale * gram_max;
  if (mu <= 0) mu = 0.02 * lips_for_default;

  CompositeProblem problem;
  problem.dimension = n + 1;
  problem.seed = seed;
  std::vector<ProductPenalty::Part> parts;
  parts.emplace_back(std::make_shared<L0Penalty>(n, mu), Slice{1, n});
  problem.penalty = std::make_shared<ProductPenalty>(std::move(parts),
                                                     std::vector<Slice>{{0, 1}}, n + 1);

  if (loss == SvmLoss::SquaredHinge) {
    problem.smooth.lipschitz = 2.0 * scale * gram_max;
    problem.smooth.value = [zt, labels, scale](const Vector& u) {
      const Vector margin = Vector::Ones(labels.size()) -
                            labels.cwiseProduct(zt * u);
      return scale * margin.cwiseMax(0.0).squaredNorm();
    };
    problem.smooth.gradient = [zt, labels, scale](const Vector& u) {
      const Vector margin = Vector::Ones(labels.size()) - labels.cwiseProduct(zt * u);
      const Vector active = margin.cwiseMax(0.0);
      return Vector(-2.0 * scale * zt.transpose() * labels.cwiseProduct(active));
    };
    problem.smooth.hessian_action = [zt, labels, scale](const Vector& u, const Vector& d) {
      const Vector margin = Vector::Ones(labels.size()) - labels.cwiseProduct(zt * u);
      Vector weights(labels.size());
      for (Index i = 0; i < labels.size(); ++i) weights[i] = margin[i] > 0 ? 2.0 : 0.0;
      return Vector(scale * zt.transpose() * weights.cwiseProduct(zt * d));
    };
    problem.smooth.smoothness_gap = [zt, labels](const Vector& u) {
      const Vector margin = Vector::Ones(labels.size()) - labels.cwiseProduct(zt * u);
      return margin.cwiseAbs().minCoeff();
    };
  } else {
    problem.smooth.lipschitz = 0.25 * scale * gram_max;
    problem.smooth.value = [zt, labels, scale](const Vector& u) {
      const Vector t = labels.cwiseProduct(zt * u);
      double total = 0;
      for (Index i = 0; i < t.size(); ++i) {
        // log(1 + exp(-t)) evaluated stably for both signs of t
        total += (t[i] >= 0) ? std::log1p(std::exp(-t[i])) : -t[i] + std::log1p(std::exp(t[i]));
      }
      return scale * total;
    };
    problem.smooth.gradient = [zt, labels, scale](const Vector& u) {
      const Vector t = labels.cwiseProduct(zt * u);
      Vector sig(t.size());
      for (Index i = 0; i < t.size(); ++i) sig[i] = 1.0 / (1.0 + std::exp(t[i]));  // sigma(-t)
      return Vector(-scale * zt.transpose() * labels.cwiseProduct(sig));
    };
    problem.smooth.hessian_action = [zt, labels, scale](const Vector& u, const Vector& d) {
      const Vector t = labels.cwiseProduct(zt * u);
      Vector weights(t.size());
      for (Index i = 0; i < t.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-t[i]));
        weights[i] = s * (1.0 - s);
      }
      return Vector(scale * zt.transpose() * weights.cwiseProduct(zt * d));
    };
  }

  json meta{{"kind", "sparse_svm"},
            {"seed", seed},
            {"m", m},
            {"n", n},
            {"loss", loss == SvmLoss::SquaredHinge ? "squared_hinge" : "logistic"},
            {"mu", mu},
            {"L", problem.smooth.lipschitz}};
  problem.metadata = meta.dump();

  json archive = meta;
  archive["features"] = to_std(features);
  archive["labels"] = to_std(labels);
  problem.archive = std::make_shared<const std::string>(archive.dump());
  return problem;
}

}  // namespace mifb
