#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mifb/errors.hpp"
#include "mifb/problems.hpp"
#include "mifb/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace mifb;

namespace {

// Central finite differences of the value; exact to roundoff for quadratics.
Vector fd_gradient(const CompositeProblem& p, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (p.smooth.value(xp) - p.smooth.value(xm)) / (2 * h);
  }
  return g;
}

Vector fd_hessian_action(const CompositeProblem& p, const Vector& x, const Vector& d,
                         double h = 1e-6) {
  return (p.smooth.gradient(x + h * d) - p.smooth.gradient(x - h * d)) / (2 * h);
}

}  // namespace

TEST_CASE("sparse regression paper instance") {
  const CompositeProblem p = make_sparse_regression(42, 48, 128, 8, -1.0, -1.0);
  CHECK(p.dimension == 128);
  CHECK(p.smooth.lipschitz > 0);
  CHECK(p.metadata.find("\"m\":48") != std::string::npos);
  CHECK(p.metadata.find("\"n\":128") != std::string::npos);

  CHECK_THROWS_AS(make_sparse_regression(1, 10, 8, 9, 0.0, 1.0), InvalidParameterError);
}

TEST_CASE("regression test hook: A = I, no noise") {
  const Index n = 6;
  Vector y(n);
  y << 1.0, -2.0, 0.0, 3.0, 0.5, -0.25;
  const CompositeProblem p = make_regression_from_data(Matrix::Identity(n, n), y, 0.1);
  CHECK(p.smooth.lipschitz == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(p.smooth.value(y) == 0.0);
  CHECK(p.smooth.gradient(y).norm() <= 1e-14);
}

TEST_CASE("regression gradient matches finite differences") {
  const CompositeProblem p = make_sparse_regression(7, 12, 20, 3, 0.01, 1.0);
  RngState rng(100);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = gaussian_vector(rng, 20);
    const Vector g = p.smooth.gradient(x);
    const Vector fd = fd_gradient(p, x);
    CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("pcp paper instance has L = 2 exactly") {
  const CompositeProblem p = make_pcp(42, 50, 50, 250, 5, -1.0, -1.0, -1.0);
  CHECK(p.dimension == 5000);
  CHECK(p.smooth.lipschitz == 2.0);
  CHECK(lipschitz_constant(p) == 2.0);

  CHECK_THROWS_AS(make_pcp(1, 4, 4, 3, 5, 0.0, 1.0, 1.0), InvalidParameterError);
  CHECK_THROWS_AS(make_pcp(1, 4, 4, 17, 2, 0.0, 1.0, 1.0), InvalidParameterError);
}

TEST_CASE("pcp hessian action matches the block form and finite differences") {
  const CompositeProblem p = make_pcp(3, 6, 5, 4, 2, 0.01, 0.3, 2.0);
  RngState rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = gaussian_vector(rng, p.dimension);
    const Vector d = gaussian_vector(rng, p.dimension);
    const Vector hd = p.smooth.hessian_action(x, d);

    const Index cells = 30;
    Vector block(p.dimension);
    block.head(cells) = d.head(cells) + d.tail(cells);
    block.tail(cells) = block.head(cells);
    CHECK((hd - block).norm() <= 1e-12);
    CHECK((hd - fd_hessian_action(p, x, d)).norm() <= 1e-5 * std::max(1.0, hd.norm()));
  }
}

TEST_CASE("svm instances and losses") {
  const CompositeProblem hinge = make_sparse_svm(42, 64, 96, SvmLoss::SquaredHinge, 0.05);
  CHECK(hinge.dimension == 97);
  // x = 0, b = 0: every margin is 1, so F = (1/m) sum max(0,1)^2 = 1.
  CHECK(hinge.smooth.value(Vector::Zero(97)) == doctest::Approx(1.0).epsilon(1e-12));

  const CompositeProblem logi = make_sparse_svm(42, 64, 96, SvmLoss::Logistic, 0.05);
  CHECK(logi.smooth.value(Vector::Zero(97)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("svm gradients match finite differences at 20 random points") {
  for (const auto loss : {SvmLoss::SquaredHinge, SvmLoss::Logistic}) {
    const CompositeProblem p = make_sparse_svm(5, 16, 10, loss, 0.05);
    RngState rng(102);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = 0.5 * gaussian_vector(rng, 11);
      const Vector g = p.smooth.gradient(x);
      const Vector fd = fd_gradient(p, x);
      CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
      const Vector d = gaussian_vector(rng, 11);
      const Vector hd = p.smooth.hessian_action(x, d);
      CHECK((hd - fd_hessian_action(p, x, d)).norm() <= 1e-5 * std::max(1.0, hd.norm()));
    }
  }
}

TEST_CASE("lipschitz constants: closed forms and dense oracle") {
  // A = 2I: L = lambda_max(4I) = 4.
  const CompositeProblem p = make_regression_from_data(2.0 * Matrix::Identity(5, 5),
                                                       Vector::Ones(5), 0.1);
  CHECK(lipschitz_constant(p) == doctest::Approx(4.0).epsilon(1e-8));

  const CompositeProblem r = make_sparse_regression(9, 20, 30, 4, 0.01, 1.0);
  RngState rng(9);
  const Matrix a = gaussian_matrix(rng, 20, 30);  // same draw as the instance
  Eigen::SelfAdjointEigenSolver<Matrix> dense(a.transpose() * a, Eigen::EigenvaluesOnly);
  CHECK(std::abs(lipschitz_constant(r) - dense.eigenvalues().maxCoeff()) <=
        1e-6 * dense.eigenvalues().maxCoeff());
}

TEST_CASE("instances are deterministic in the seed") {
  const CompositeProblem a = make_sparse_regression(11, 10, 16, 3, -1.0, 1.0);
  const CompositeProblem b = make_sparse_regression(11, 10, 16, 3, -1.0, 1.0);
  CHECK(*a.archive == *b.archive);

  RngState rng(200);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = gaussian_vector(rng, 16);
    CHECK(a.smooth.value(x) == b.smooth.value(x));
    CHECK(a.smooth.gradient(x) == b.smooth.gradient(x));
  }

  const CompositeProblem c = make_sparse_regression(12, 10, 16, 3, -1.0, 1.0);
  CHECK(*a.archive != *c.archive);
}

TEST_CASE("gradient is L-Lipschitz on sampled pairs") {
  const CompositeProblem instances[] = {
      make_sparse_regression(21, 14, 24, 4, 0.01, 1.0),
      make_pcp(21, 5, 4, 3, 2, 0.01, 0.3, 2.0),
      make_sparse_svm(21, 12, 8, SvmLoss::SquaredHinge, 0.05),
      make_sparse_svm(21, 12, 8, SvmLoss::Logistic, 0.05),
  };
  RngState rng(300);
  for (const auto& p : instances) {
    const double lips = p.smooth.lipschitz;
    for (int trial = 0; trial < 100; ++trial) {
      const Vector u = gaussian_vector(rng, p.dimension);
      const Vector v = gaussian_vector(rng, p.dimension);
      const double lhs = (p.smooth.gradient(u) - p.smooth.gradient(v)).norm();
      CHECK(lhs <= (1.0 + 1e-9) * lips * (u - v).norm());
    }
  }
}

TEST_CASE("objective is bounded below by zero on all built-ins") {
  const CompositeProblem instances[] = {
      make_sparse_regression(31, 14, 24, 4, 0.01, 1.0),
      make_pcp(31, 5, 4, 3, 2, 0.01, 0.3, 2.0),
      make_sparse_svm(31, 12, 8, SvmLoss::Logistic, 0.05),
  };
  RngState rng(400);
  for (const auto& p : instances) {
    for (int trial = 0; trial < 20; ++trial) {
      CHECK(p.objective(gaussian_vector(rng, p.dimension)) >= 0.0);
    }
  }
}
