#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mifb/errors.hpp"
#include "mifb/linalg.hpp"
#include "mifb/penalties.hpp"
#include "mifb/rng.hpp"

#include <cmath>

using namespace mifb;

namespace {

double l0_prox_objective(const Vector& x, const Vector& z, double theta) {
  return 0.5 * (x - z).squaredNorm() + theta * static_cast<double>(l0_value(x));
}

Matrix truncate_to_rank(const SvdResult& dec, Index r) {
  Matrix out = Matrix::Zero(dec.u.rows(), dec.v.rows());
  for (Index i = 0; i < r; ++i) {
    out += dec.sigma[i] * dec.u.col(i) * dec.v.col(i).transpose();
  }
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }
Matrix unvec(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace

TEST_CASE("prox_l0 direct cases") {
  Vector z(3);
  z << 3.0, 0.1, -2.0;
  const Vector out = prox_l0(z, 1.0);  // threshold sqrt(2) ~ 1.414
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == -2.0);

  // Tie |z| = sqrt(2 theta): both candidates give objective 0.5; rule picks 0.
  Vector single(1);
  single << 1.0;
  CHECK(prox_l0(single, 0.5)[0] == 0.0);

  CHECK_THROWS_AS(prox_l0(z, 0.0), InvalidParameterError);
  CHECK_THROWS_AS(prox_l0(z, -1.0), InvalidParameterError);
}

TEST_CASE("prox_l0 matches the two-candidate brute force") {
  RngState rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next_below(8));
    const Vector z = 2.0 * gaussian_vector(rng, n);
    const double theta = 0.01 + rng.next_uniform();
    const Vector out = prox_l0(z, theta);

    for (Index i = 0; i < n; ++i) {
      // Per-coordinate oracle over the only two candidates {0, z_i}.
      const double keep = theta;                    // cost 0.5*0 + theta*1
      const double drop = 0.5 * z[i] * z[i];        // cost of zeroing
      const double expected = (keep < drop) ? z[i] : 0.0;
      CHECK(out[i] == expected);
      CHECK((out[i] == 0.0 || out[i] == z[i]));
    }
    // Idempotence is exact for hard thresholding.
    CHECK(prox_l0(out, theta) == out);
    // Optimality against the oracle objective.
    Vector oracle(n);
    for (Index i = 0; i < n; ++i) {
      oracle[i] = (0.5 * z[i] * z[i] > theta) ? z[i] : 0.0;
    }
    CHECK(l0_prox_objective(out, z, theta) <= l0_prox_objective(oracle, z, theta) + 1e-12);
  }
}

TEST_CASE("prox_rank diagonal and zero cases") {
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 3.0;
  z(1, 1) = 0.5;
  const Matrix out = prox_rank(z, 1.0);  // threshold sqrt(2)
  CHECK(out(0, 0) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(std::abs(out(1, 1)) < 1e-13);
  CHECK(rank_value(out) == 1);

  CHECK(prox_rank(Matrix::Zero(3, 4), 2.0) == Matrix::Zero(3, 4));
  CHECK_THROWS_AS(prox_rank(z, 0.0), InvalidParameterError);
}

TEST_CASE("prox_rank attains the best truncation-rank objective") {
  RngState rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix z = gaussian_matrix(rng, 10, 8);
    const double theta = 0.05 + 4.0 * rng.next_uniform();
    const Matrix out = prox_rank(z, theta);

    const SvdResult dec = svd(z);
    double best = std::numeric_limits<double>::infinity();
    Matrix best_m;
    for (Index r = 0; r <= 8; ++r) {
      const Matrix zr = truncate_to_rank(dec, r);
      const double obj = 0.5 * (z - zr).squaredNorm() + theta * static_cast<double>(r);
      if (obj < best) {
        best = obj;
        best_m = zr;
      }
    }
    const double out_obj =
        0.5 * (z - out).squaredNorm() + theta * static_cast<double>(rank_value(out));
    CHECK(out_obj <= best + 1e-12);
    CHECK((out - best_m).norm() <= 1e-10);
    // Idempotence to 1e-10 in Frobenius norm.
    CHECK((prox_rank(out, theta) - out).norm() <= 1e-10);
  }
}

TEST_CASE("l0_value and rank_value") {
  Vector x(4);
  x << 0.0, 2.0, 0.0, -1.0;
  CHECK(l0_value(x) == 2);
  CHECK(rank_value(Matrix::Zero(4, 4)) == 0);

  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 3.0;
  z(1, 1) = 0.5;
  CHECK(rank_value(prox_rank(z, 1.0)) == 1);
}

TEST_CASE("manifold_info_l0 basis and projector") {
  Vector x(3);
  x << 0.0, 5.0, 0.0;
  const ManifoldInfo info = manifold_info_l0(x);
  CHECK(info.tangent_dim() == 1);
  CHECK(info.tangent_basis(1, 0) == 1.0);
  Vector ones = Vector::Ones(3);
  const Vector proj = info.tangent_projector(ones);
  CHECK(proj[0] == 0.0);
  CHECK(proj[1] == 1.0);
  CHECK(proj[2] == 0.0);

  // Degenerate support.
  const ManifoldInfo zero_info = manifold_info_l0(Vector::Zero(3));
  CHECK(zero_info.tangent_dim() == 0);
  CHECK(zero_info.tangent_projector(ones).isZero(0.0));

  RngState rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector v = gaussian_vector(rng, 3);
    const Vector once = info.tangent_projector(v);
    CHECK((info.tangent_projector(once) - once).norm() <= 1e-12);
  }
}

TEST_CASE("manifold_info_rank coordinate case and dimension formula") {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = 1.0;
  const ManifoldInfo info = manifold_info_rank(x);
  CHECK(info.tangent_dim() == 1 * (2 + 2 - 1));

  Matrix z(2, 2);
  z << 1.0, 2.0, 3.0, 4.0;
  const Matrix pz = unvec(info.tangent_projector(vec(z)), 2, 2);
  // Row 1 and column 1 survive; the (2,2) entry is zeroed.
  CHECK(pz(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pz(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pz(1, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(pz(1, 1)) < 1e-12);

  // Dimension formula at n1 = n2 = 50, r = 5.
  RngState rng(8);
  const Matrix p = gaussian_matrix(rng, 50, 5);
  const Matrix q = gaussian_matrix(rng, 50, 5);
  const ManifoldInfo big = manifold_info_rank(p * q.transpose());
  CHECK(big.tangent_dim() == 5 * (50 + 50 - 5));
}

TEST_CASE("rank tangent projector satisfies the defining condition") {
  RngState rng(17);
  const Matrix p = gaussian_matrix(rng, 6, 2);
  const Matrix q = gaussian_matrix(rng, 5, 2);
  const Matrix x = p * q.transpose();
  const SvdResult dec = svd(x);
  const Index r = 2;
  const ManifoldInfo info = manifold_info_rank(x);

  for (int trial = 0; trial < 50; ++trial) {
    const Matrix z = gaussian_matrix(rng, 6, 5);
    const Matrix pz = unvec(info.tangent_projector(vec(z)), 6, 5);
    // u_i^T P(z) v_j = 0 for all i, j > r.
    for (Index i = r; i < 6; ++i) {
      for (Index j = r; j < 5; ++j) {
        CHECK(std::abs(dec.u.col(i).dot(pz * dec.v.col(j))) <= 1e-10);
      }
    }
    // P fixes anything already satisfying the condition.
    const Vector fixed = info.tangent_projector(vec(pz));
    CHECK((fixed - vec(pz)).norm() <= 1e-10);
  }
}

TEST_CASE("manifold projectors are idempotent, self-adjoint, and consistent with the basis") {
  RngState rng(23);
  const Matrix p = gaussian_matrix(rng, 6, 2);
  const Matrix q = gaussian_matrix(rng, 5, 2);
  const Matrix x = p * q.transpose();
  const ManifoldInfo info = manifold_info_rank(x);
  const Matrix& basis = info.tangent_basis;

  CHECK((basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols()))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const Vector u = gaussian_vector(rng, 30);
    const Vector v = gaussian_vector(rng, 30);
    const Vector pu = info.tangent_projector(u);
    CHECK((info.tangent_projector(pu) - pu).norm() <= 1e-12);
    // Self-adjointness: <Pu, v> = <u, Pv>.
    CHECK(pu.dot(v) == doctest::Approx(u.dot(info.tangent_projector(v))).epsilon(1e-10));
  }
  // projector o basis = basis.
  for (Index j = 0; j < basis.cols(); ++j) {
    CHECK((info.tangent_projector(basis.col(j)) - basis.col(j)).norm() <= 1e-10);
  }
}

TEST_CASE("penalty classes scale the threshold by mu") {
  const L0Penalty pen(3, 2.0);
  Vector z(3);
  z << 3.0, 1.5, -0.5;
  // prox_{gamma R} with R = 2 ||.||_0 and gamma = 0.5: threshold sqrt(2).
  const auto res = pen.prox_with_signature(z, 0.5);
  CHECK(res.point[0] == 3.0);
  CHECK(res.point[1] == 1.5);
  CHECK(res.point[2] == 0.0);
  CHECK(pen.value(res.point) == 4.0);
  CHECK(pen.value_from_signature(res.signature) == 4.0);
}

TEST_CASE("riemannian hessian of built-ins is zero") {
  RngState rng(31);
  const L0Penalty l0(5, 1.0);
  const RankPenalty rk(4, 3, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = gaussian_vector(rng, 5);
    const Vector h = gaussian_vector(rng, 5);
    CHECK(l0.riemannian_hessian_action(x, h).isZero(0.0));
    const Vector xm = gaussian_vector(rng, 12);
    const Vector hm = gaussian_vector(rng, 12);
    CHECK(rk.riemannian_hessian_action(xm, hm).isZero(0.0));
  }
}

TEST_CASE("product penalty: PCP blockwise prox") {
  const Index cells = 4;  // 2x2 blocks
  std::vector<ProductPenalty::Part> parts;
  parts.emplace_back(std::make_shared<L0Penalty>(cells, 1.0), Slice{0, cells});
  parts.emplace_back(std::make_shared<RankPenalty>(2, 2, 1.0), Slice{cells, cells});
  const ProductPenalty pcp(std::move(parts), {}, 2 * cells);

  RngState rng(41);
  const Vector zs = gaussian_vector(rng, cells);
  const Vector zl = gaussian_vector(rng, cells);
  Vector z(2 * cells);
  z << zs, zl;

  const double gamma = 0.7;
  const Vector out = pcp.prox(z, gamma);
  CHECK((out.head(cells) - prox_l0(zs, gamma * 1.0)).norm() == 0.0);
  const Matrix zl_m = unvec(zl, 2, 2);
  CHECK((unvec(out.tail(cells), 2, 2) - prox_rank(zl_m, gamma * 1.0)).norm() <= 1e-14);
}

TEST_CASE("product penalty: free slice passes through unpenalized") {
  std::vector<ProductPenalty::Part> parts;
  parts.emplace_back(std::make_shared<L0Penalty>(3, 2.0), Slice{1, 3});
  const ProductPenalty svm(std::move(parts), {{0, 1}}, 4);

  Vector z(4);
  z << 7.5, 3.0, 0.1, -2.0;
  const Vector out = svm.prox(z, 0.5);
  CHECK(out[0] == 7.5);  // b is free
  CHECK((out.tail(3) - prox_l0(z.tail(3), 0.5 * 2.0)).norm() == 0.0);
  CHECK(svm.value(out) == 2.0 * 2.0);

  // Free block contributes a full block to the manifold.
  const ManifoldInfo info = svm.manifold_at(out);
  CHECK(info.tangent_dim() == 1 + 2);
  Vector v = Vector::Ones(4);
  const Vector pv = info.tangent_projector(v);
  CHECK(pv[0] == 1.0);
}

TEST_CASE("product of a single part equals that part") {
  auto l0 = std::make_shared<L0Penalty>(6, 1.3);
  const ProductPenalty prod({{l0, Slice{0, 6}}}, {}, 6);
  RngState rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector z = 2.0 * gaussian_vector(rng, 6);
    const double gamma = 0.05 + rng.next_uniform();
    CHECK(prod.prox(z, gamma) == l0->prox(z, gamma));
    CHECK(prod.signature_of(z) == ActivitySignature::product({l0->signature_of(z)}));
  }
}

TEST_CASE("product penalty rejects bad partitions") {
  auto l0 = std::make_shared<L0Penalty>(3, 1.0);
  // Overlapping.
  CHECK_THROWS_AS(ProductPenalty({{l0, Slice{0, 3}}}, {{2, 2}}, 4), PartitionError);
  // Non-covering.
  CHECK_THROWS_AS(ProductPenalty({{l0, Slice{0, 3}}}, {}, 5), PartitionError);
  // Dimension mismatch between part and slice.
  CHECK_THROWS_AS(ProductPenalty({{l0, Slice{0, 2}}}, {{2, 3}}, 5), ShapeError);
}
