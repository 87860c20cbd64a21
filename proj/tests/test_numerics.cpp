#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mifb/errors.hpp"
#include "mifb/linalg.hpp"
#include "mifb/rng.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <numbers>

using namespace mifb;

TEST_CASE("gaussian_vector is deterministic per seed") {
  RngState s1(42);
  RngState s2(42);
  const Vector a = gaussian_vector(s1, 4);
  const Vector b = gaussian_vector(s2, 4);
  for (Index i = 0; i < 4; ++i) CHECK(a[i] == b[i]);  // bit-identical

  RngState t1(1), t2(2);
  CHECK(gaussian_vector(t1, 3) != gaussian_vector(t2, 3));
}

TEST_CASE("gaussian_vector moments at n = 1e5") {
  RngState state(42);
  const Vector x = gaussian_vector(state, 100000);
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("gaussian_vector rejects n = 0") {
  RngState state(7);
  CHECK_THROWS_AS(gaussian_vector(state, 0), InvalidParameterError);
}

TEST_CASE("rng streams are reproducible bit for bit") {
  RngState a(123456789), b(123456789);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u32() == b.next_u32());
}

TEST_CASE("svd of identity and diagonal matrices") {
  const SvdResult id = svd(Matrix::Identity(3, 3));
  for (Index i = 0; i < 3; ++i) CHECK(id.sigma[i] == doctest::Approx(1.0).epsilon(1e-14));

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3.0, 2.0, 1.0;
  const SvdResult dd = svd(d);
  CHECK(dd.sigma[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(dd.sigma[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(dd.sigma[2] == doctest::Approx(1.0).epsilon(1e-14));
  // U and V are the identity up to per-column signs.
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::abs(std::abs(dd.u(j, j)) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(dd.v(j, j)) - 1.0) < 1e-14);
    CHECK(dd.u(j, j) * dd.v(j, j) > 0);  // signs cancel in the product
  }
}

TEST_CASE("svd reconstruction and orthonormality on a random 10x8") {
  RngState state(7);
  const Matrix a = gaussian_matrix(state, 10, 8);
  const SvdResult dec = svd(a);

  const double scale = std::max(1.0, a.norm());
  CHECK((dec.reconstruct() - a).norm() <= 1e-10 * scale);
  CHECK((dec.u.transpose() * dec.u - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((dec.v.transpose() * dec.v - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-12);
  for (Index i = 0; i + 1 < dec.sigma.size(); ++i) CHECK(dec.sigma[i] >= dec.sigma[i + 1]);
}

TEST_CASE("svd rejects non-finite input") {
  Matrix a = Matrix::Ones(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(a), InvalidParameterError);
}

TEST_CASE("eigenvalues of known spectra") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 5.0, -1.0, 0.5;
  CHECK(test::multiset_match(eigenvalues(d), {{5, 0}, {-1, 0}, {0.5, 0}}, 1e-12));

  const double theta = std::numbers::pi / 3.0;
  Matrix rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  CHECK(test::multiset_match(eigenvalues(rot),
                             {{std::cos(theta), std::sin(theta)},
                              {std::cos(theta), -std::sin(theta)}},
                             1e-12));
}

TEST_CASE("eigenvalues of a companion matrix match the quadratic formula") {
  // lambda^2 - 1.1 lambda + 0.1 = (lambda - 1)(lambda - 0.1)
  Matrix c(2, 2);
  c << 1.1, -0.1, 1.0, 0.0;
  // Oracle: roots via the quadratic formula.
  const double disc = std::sqrt(1.1 * 1.1 - 4.0 * 0.1);
  const double r1 = (1.1 + disc) / 2.0;
  const double r2 = (1.1 - disc) / 2.0;
  CHECK(test::multiset_match(eigenvalues(c), {{r1, 0}, {r2, 0}}, 1e-10));
  CHECK(r1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r2 == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("eigenvalues rejects non-square input") {
  CHECK_THROWS_AS(eigenvalues(Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("spectrum is invariant under similarity transforms") {
  RngState state(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = gaussian_matrix(state, 6, 6);
    Matrix p = gaussian_matrix(state, 6, 6);
    // Make sure P is comfortably invertible.
    p += 3.0 * Matrix::Identity(6, 6);
    const Matrix sim = p.inverse() * m * p;
    CHECK(test::multiset_match(eigenvalues(sim), eigenvalues(m), 1e-7));
  }
}

TEST_CASE("largest_eigenvalue_sym on a diagonal operator") {
  const double tol = 1e-10;
  const auto apply = [](const Vector& v) {
    Vector out = v;
    out[0] *= 4.0;
    return out;
  };
  const double lambda = largest_eigenvalue_sym(apply, 2, tol);
  CHECK(std::abs(lambda - 4.0) <= 4.0 * tol * 10);
}

TEST_CASE("largest_eigenvalue_sym matches the dense spectrum of A^T A") {
  RngState state(3);
  const Matrix a = gaussian_matrix(state, 48, 128);
  const Matrix gram = a.transpose() * a;
  const auto apply = [&a](const Vector& v) { return Vector(a.transpose() * (a * v)); };
  const double tol = 1e-8;
  const double lambda = largest_eigenvalue_sym(apply, 128, tol);

  Eigen::SelfAdjointEigenSolver<Matrix> dense(gram, Eigen::EigenvaluesOnly);
  const double truth = dense.eigenvalues().maxCoeff();
  CHECK(std::abs(lambda - truth) <= tol * truth * 10);
}

TEST_CASE("largest_eigenvalue_sym of the zero operator is 0") {
  const auto apply = [](const Vector& v) { return Vector(Vector::Zero(v.size())); };
  CHECK(largest_eigenvalue_sym(apply, 5, 1e-8) == 0.0);
}

TEST_CASE("largest_eigenvalue_sym reports non-convergence with a best estimate") {
  // A rotation is not symmetric; the Rayleigh residual never vanishes.
  const double theta = std::numbers::pi / 3.0;
  Matrix rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const auto apply = [&rot](const Vector& v) { return Vector(rot * v); };
  CHECK_THROWS_AS(largest_eigenvalue_sym(apply, 2, 1e-14), ConvergenceError);
}
