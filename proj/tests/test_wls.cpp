#include "support.hpp"

using namespace polydec;
using testing::Rng;

TEST_CASE("min_norm_solve: full rank and rank-deficient") {
  Rng rng(1);
  const Matrix a = rng.matrix(8, 3);
  const Vector y = rng.vector(8);
  SolveInfo info;
  const Vector x = min_norm_solve(a, y, &info).col(0);
  CHECK((x - a.colPivHouseholderQr().solve(y)).norm() <= 1e-10);
  CHECK_FALSE(info.rank_deficient);

  Matrix def = a;
  def.col(2) = def.col(0) + def.col(1);
  SolveInfo info2;
  const Vector x2 = min_norm_solve(def, y, &info2).col(0);
  CHECK(info2.rank_deficient);
  CHECK((x2 - testing::pinv(def) * y).norm() <= 1e-10);
}

TEST_CASE("weighted_normal_solve: dense oracle, with and without permutation") {
  Rng rng(2);
  const TensorDims d{2, 2, 3};
  for (int t = 0; t < 10; ++t) {
    const Matrix a = rng.matrix(12, 4);
    const Vector y = rng.vector(12);
    const Matrix w = rng.spd(12);
    for (int mode = 1; mode <= 3; ++mode) {
      const Permutation p = permutation(mode, d);
      const Matrix pw = p.congruence(w);
      const Vector expected = (a.transpose() * pw * a).ldlt().solve(a.transpose() * pw * y);
      const Vector x = weighted_normal_solve(a, y, WeightOperator::dense(w), p);
      CHECK((x - expected).norm() <= 1e-9 * (1 + expected.norm()));
      // pre-permuted weight with the identity permutation
      const Vector x2 = weighted_normal_solve(a, y, WeightOperator::dense(pw), Permutation::identity(12));
      CHECK((x - x2).norm() <= 1e-9 * (1 + x.norm()));
    }
  }
}

TEST_CASE("weighted_normal_solve: singular normal matrix falls back to the pseudo-inverse") {
  Rng rng(3);
  Matrix a = rng.matrix(6, 3);
  a.col(2) = a.col(1);
  SolveInfo info;
  const Vector x = weighted_normal_solve(a, rng.vector(6), WeightOperator::identity(6), Permutation::identity(6), &info);
  CHECK(info.pinv_fallback);
  CHECK(x.allFinite());
}

TEST_CASE("q_transform_solve: equals weighted normal equations for a full-rank weight") {
  Rng rng(4);
  const TensorDims d{2, 3, 2};
  for (int t = 0; t < 25; ++t) {
    const Matrix a = rng.matrix(12, 5);
    const Vector y = rng.vector(12);
    const Matrix sigma = rng.spd(12);
    const SvdSplit split = svd_split(sigma);
    REQUIRE(split.rank == 12);
    const Permutation p = permutation(1 + t % 3, d);
    const Matrix w = p.congruence(sigma).inverse();
    const Vector expected = (a.transpose() * w * a).ldlt().solve(a.transpose() * w * y);
    const Vector x = q_transform_solve(a, y, split, p);
    CHECK((x - expected).norm() <= 1e-8 * expected.norm());
  }
}

TEST_CASE("nullspace_solve: recovers x* under correlated noise of any size") {
  Rng rng(5);
  for (int t = 0; t < 25; ++t) {
    const Index rows = 12, cols = 3, noise_dim = 5;
    const Matrix a = rng.matrix(rows, cols);
    const Matrix mix = rng.matrix(rows, noise_dim);
    const Vector xstar = rng.vector(cols);
    const double magnitude = std::pow(10.0, rng.uniform(-3, 6));
    const Vector y = a * xstar + magnitude * mix * rng.vector(noise_dim);
    const SvdSplit split = svd_split(mix * mix.transpose());
    REQUIRE(split.rank == noise_dim);
    const Vector x = nullspace_solve(a, y, split, Permutation::identity(rows));
    CHECK((x - xstar).norm() <= 1e-8 * (1 + xstar.norm()) * std::max(1.0, magnitude * 1e-6));
  }
}

TEST_CASE("stacked_solve: full-rank covariance leaves the null-space block empty") {
  Rng rng(6);
  const TensorDims d{2, 2, 2};
  const Matrix a = rng.matrix(8, 3);
  const Vector y = rng.vector(8);
  const Matrix sigma = rng.spd(8);
  const SvdSplit split = svd_split(sigma);
  const Permutation p = permutation(2, d);
  CHECK(stacked_matrix(a, split, p).rows() == split.rank);
  const Vector x = stacked_solve(a, y, split, p);
  const Vector expected = weighted_normal_solve(a, y, WeightOperator::dense(sigma.inverse()), p);
  CHECK((x - expected).norm() <= 1e-8 * (1 + expected.norm()));
}

TEST_CASE("stacked_solve: exact data satisfies both blocks") {
  Rng rng(7);
  const Matrix a = rng.matrix(10, 3);
  const Vector xstar = rng.vector(3);
  const Vector y = a * xstar;
  const SvdSplit split = svd_split(rng.psd(10, 6));
  const Permutation p = Permutation::identity(10);
  const Vector x = stacked_solve(a, y, split, p);
  CHECK((x - xstar).norm() <= 1e-10 * (1 + xstar.norm()));
  CHECK((split.U2.transpose() * (y - a * x)).norm() <= 1e-10);
}

TEST_CASE("stacked_matrix: blocks are Q a and scaled U2^T P^T a") {
  Rng rng(8);
  const TensorDims d{2, 2, 3};
  const Matrix a = rng.matrix(12, 4);
  const SvdSplit split = svd_split(rng.psd(12, 7));
  const Permutation p = permutation(1, d);
  const Matrix s = stacked_matrix(a, split, p, 2.5);
  CHECK(testing::rel_diff(s.topRows(7), q_factor(split, p) * a) <= 1e-12);
  CHECK(testing::rel_diff(s.bottomRows(5), 2.5 * split.U2.transpose() * p.apply_transpose_rows(a)) <= 1e-12);
}

TEST_CASE("solvers: dimension checks") {
  const Matrix a = Matrix::Zero(6, 2);
  CHECK_THROWS_AS(weighted_normal_solve(a, Vector::Zero(5), WeightOperator::identity(6), Permutation::identity(6)),
                  DimensionError);
  CHECK_THROWS_AS(weighted_normal_solve(a, Vector::Zero(6), WeightOperator::identity(5), Permutation::identity(6)),
                  DimensionError);
  CHECK_THROWS_AS(stacked_solve(a, Vector::Zero(6), svd_split(Matrix::Identity(5, 5)), Permutation::identity(6)),
                  DimensionError);
}
