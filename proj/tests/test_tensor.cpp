#include <gtest/gtest.h>

#include "test_support.hpp"
#include "unilearn/tensor.hpp"

using namespace unilearn;
using testsup::random_hermitian;
using testsup::random_matrix;
using testsup::random_unitary;

namespace {

LabeledOperator make_op(std::vector<SystemLabel> labels, Matrix m) {
  return LabeledOperator(std::move(labels), std::move(m));
}

Matrix diag2(Complex a, Complex b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

//============================================================================
// construction and labels
//============================================================================

TEST(Labels, InvariantsEnforced) {
  EXPECT_THROW(make_op({{"a", 2}, {"a", 3}}, Matrix::Identity(6, 6)), DuplicateLabel);
  EXPECT_THROW(make_op({{"a", 0}}, Matrix::Identity(1, 1)), ShapeMismatch);
  EXPECT_THROW(make_op({{"", 2}}, Matrix::Identity(2, 2)), ShapeMismatch);
  EXPECT_THROW(make_op({{"a", 2}}, Matrix::Identity(3, 3)), ShapeMismatch);
  EXPECT_THROW(make_op({{"a", 65}, {"b", 64}}, Matrix::Identity(4160, 4160)), CapExceeded);
}

TEST(Labels, Accessors) {
  const auto op = LabeledOperator::identity({{"a", 2}, {"b", 3}});
  EXPECT_EQ(op.dim(), 6);
  EXPECT_TRUE(op.has_label("b"));
  EXPECT_FALSE(op.has_label("c"));
  EXPECT_EQ(op.label("b").dim, 3);
  EXPECT_NEAR(std::abs(op.trace() - Complex(6.0)), 0.0, 1e-15);
}

//============================================================================
// tensor product
//============================================================================

TEST(Tensor, IdentityTimesIdentity) {
  const auto ab = tensor(LabeledOperator::identity({{"a", 2}}),
                         LabeledOperator::identity({{"b", 3}}));
  EXPECT_EQ(ab.dim(), 6);
  EXPECT_NEAR((ab.matrix() - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(Tensor, DiagonalProduct) {
  const auto ab = tensor(make_op({{"a", 2}}, diag2(1.0, 2.0)),
                         make_op({{"b", 2}}, diag2(3.0, 4.0)));
  Vector d(4);
  d << 3.0, 4.0, 6.0, 8.0;
  EXPECT_NEAR((ab.matrix().diagonal() - d).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Tensor, TraceMultiplicative) {
  RngStream rng(11, 0);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(rng, 2, 2), b = random_matrix(rng, 2, 2);
    const auto ab = tensor(make_op({{"a", 2}}, a), make_op({{"b", 2}}, b));
    EXPECT_NEAR(std::abs(ab.trace() - a.trace() * b.trace()), 0.0, 1e-12);
  }
}

TEST(Tensor, DuplicateLabelRejected) {
  const auto a = LabeledOperator::identity({{"a", 2}});
  EXPECT_THROW(tensor(a, a), DuplicateLabel);
}

//============================================================================
// partial trace
//============================================================================

TEST(PartialTrace, IdentityFactor) {
  const auto op = LabeledOperator::identity({{"a", 2}, {"b", 2}});
  const auto red = partial_trace(op, {"b"});
  ASSERT_EQ(red.labels().size(), 1u);
  EXPECT_EQ(red.labels()[0].id, "a");
  EXPECT_NEAR((red.matrix() - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(PartialTrace, BellMarginal) {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto rho = outer(LabeledVector({{"a", 2}, {"b", 2}}, bell));
  const auto red = partial_trace(rho, {"a"});
  EXPECT_NEAR((red.matrix() - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(PartialTrace, PreservesFullTrace) {
  RngStream rng(12, 0);
  for (int t = 0; t < 20; ++t) {
    const auto op = make_op({{"a", 2}, {"b", 2}}, random_matrix(rng, 4, 4));
    EXPECT_NEAR(std::abs(partial_trace(op, {"a"}).trace() - op.trace()), 0.0, 1e-12);
  }
}

TEST(PartialTrace, Composes) {
  RngStream rng(13, 0);
  const auto op = make_op({{"a", 2}, {"b", 3}, {"c", 2}}, random_matrix(rng, 12, 12));
  const auto one = partial_trace(partial_trace(op, {"a"}), {"c"});
  const auto both = partial_trace(op, {"a", "c"});
  EXPECT_NEAR((one.matrix() - both.matrix()).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(PartialTrace, Errors) {
  const auto op = LabeledOperator::identity({{"a", 2}, {"b", 2}});
  EXPECT_THROW(partial_trace(op, {"x"}), UnknownLabel);
  EXPECT_THROW(partial_trace(op, {"a", "a"}), DuplicateLabel);
}

//============================================================================
// partial transpose
//============================================================================

TEST(PartialTranspose, Involution) {
  RngStream rng(14, 0);
  const auto op = make_op({{"a", 2}, {"b", 3}}, random_matrix(rng, 6, 6));
  const auto twice = partial_transpose(partial_transpose(op, {"b"}), {"b"});
  EXPECT_NEAR((twice.matrix() - op.matrix()).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(PartialTranspose, SingleLabelIsFullTranspose) {
  RngStream rng(15, 0);
  const Matrix a = random_matrix(rng, 3, 3);
  const auto t = partial_transpose(make_op({{"a", 3}}, a), {"a"});
  EXPECT_NEAR((t.matrix() - a.transpose()).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(PartialTranspose, FactorWise) {
  RngStream rng(16, 0);
  const Matrix a = random_matrix(rng, 2, 2), b = random_matrix(rng, 2, 2);
  const auto ab = tensor(make_op({{"a", 2}}, a), make_op({{"b", 2}}, b));
  const auto tb = partial_transpose(ab, {"b"});
  EXPECT_NEAR((tb.matrix() - detail::kron(a, Matrix(b.transpose()))).cwiseAbs().maxCoeff(),
              0.0, 1e-14);
  EXPECT_THROW(partial_transpose(ab, {"z"}), UnknownLabel);
}

//============================================================================
// vectorization
//============================================================================

TEST(Vectorize, IdentityCase) {
  const auto v = vectorize(LabeledOperator::identity({{"a", 2}}));
  Vector expect(4);
  expect << 1.0, 0.0, 0.0, 1.0;
  EXPECT_NEAR((v.vector() - expect).cwiseAbs().maxCoeff(), 0.0, 0.0);
  ASSERT_EQ(v.labels().size(), 2u);
  EXPECT_EQ(v.labels()[1].id, "a'");
}

TEST(Vectorize, MatrixUnit) {
  Matrix e01 = Matrix::Zero(2, 2);
  e01(0, 1) = 1.0;
  const auto v = vectorize(make_op({{"a", 2}}, e01));
  Vector expect = Vector::Zero(4);
  expect(1) = 1.0;  // |0>|1>
  EXPECT_NEAR((v.vector() - expect).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(Vectorize, TraceInnerProduct) {
  RngStream rng(17, 0);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = random_matrix(rng, 3, 3), b = random_matrix(rng, 3, 3);
    const Complex lhs = inner(vectorize(make_op({{"a", 3}}, a)), vectorize(make_op({{"a", 3}}, b)));
    EXPECT_NEAR(std::abs(lhs - (a.adjoint() * b).trace()), 0.0, 1e-12);
  }
}

TEST(Vectorize, RoundTrip) {
  RngStream rng(18, 0);
  const auto op = make_op({{"a", 2}, {"b", 3}}, random_matrix(rng, 6, 6));
  const auto back = devectorize(vectorize(op));
  EXPECT_EQ(back.labels().size(), op.labels().size());
  EXPECT_NEAR((back.matrix() - op.matrix()).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(Vectorize, MirrorIdentity) {
  RngStream rng(19, 0);
  for (int t = 0; t < 10; ++t) {
    // commuting pair built from a shared eigenbasis
    const Matrix v = random_unitary(rng, 3);
    Matrix da = Matrix::Zero(3, 3), db = Matrix::Zero(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      da(i, i) = rng.complex_normal();
      db(i, i) = rng.complex_normal();
    }
    const Matrix a = v * da * v.adjoint(), b = v * db * v.adjoint();
    const Vector bb = vectorize(make_op({{"s", 3}}, b)).vector();
    const Vector lhs = detail::kron(a, Matrix(Matrix::Identity(3, 3))) * bb;
    const Vector rhs = detail::kron(Matrix(Matrix::Identity(3, 3)), Matrix(a.transpose())) * bb;
    EXPECT_NEAR((lhs - rhs).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

//============================================================================
// reorder
//============================================================================

TEST(Reorder, IdentityPermutation) {
  RngStream rng(20, 0);
  const auto op = make_op({{"a", 2}, {"b", 2}}, random_matrix(rng, 4, 4));
  const auto same = reorder(op, {"a", "b"});
  EXPECT_NEAR((same.matrix() - op.matrix()).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(Reorder, SwapEqualsKronSwap) {
  RngStream rng(21, 0);
  const Matrix a = random_matrix(rng, 2, 2), b = random_matrix(rng, 2, 2);
  const auto ab = tensor(make_op({{"a", 2}}, a), make_op({{"b", 2}}, b));
  const auto ba = reorder(ab, {"b", "a"});
  EXPECT_EQ(ba.labels()[0].id, "b");
  EXPECT_NEAR((ba.matrix() - detail::kron(b, a)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(Reorder, SpectrumInvariant) {
  RngStream rng(22, 0);
  const auto op = make_op({{"a", 2}, {"b", 3}}, random_hermitian(rng, 6));
  const auto perm = reorder(op, {"b", "a"});
  const auto e1 = hermitian_eig(op), e2 = hermitian_eig(perm);
  EXPECT_NEAR((e1.values - e2.values).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(Reorder, GroupAction) {
  RngStream rng(23, 0);
  const auto op = make_op({{"a", 2}, {"b", 2}, {"c", 2}}, random_matrix(rng, 8, 8));
  const auto once = reorder(reorder(op, {"b", "c", "a"}), {"c", "a", "b"});
  const auto direct = reorder(op, {"c", "a", "b"});
  EXPECT_EQ(once.labels()[0].id, "c");
  EXPECT_NEAR((once.matrix() - direct.matrix()).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(Reorder, Errors) {
  const auto op = LabeledOperator::identity({{"a", 2}, {"b", 2}});
  EXPECT_THROW(reorder(op, {"a"}), InvalidPermutation);
  EXPECT_THROW(reorder(op, {"a", "z"}), InvalidPermutation);
  EXPECT_THROW(reorder(op, {"a", "a"}), InvalidPermutation);
}

//============================================================================
// misc algebra
//============================================================================

TEST(Multiply, RequiresIdenticalLabels) {
  RngStream rng(24, 0);
  const auto a = make_op({{"a", 2}, {"b", 2}}, random_matrix(rng, 4, 4));
  const auto b = make_op({{"a", 2}, {"b", 2}}, random_matrix(rng, 4, 4));
  const auto ab = multiply(a, b);
  EXPECT_NEAR((ab.matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff(), 0.0, 0.0);
  EXPECT_THROW(multiply(a, reorder(b, {"b", "a"})), ShapeMismatch);
}

TEST(PartialInner, MatchesDenseContraction) {
  RngStream rng(25, 0);
  const Vector s = random_matrix(rng, 2, 1).col(0);
  const Vector big = random_matrix(rng, 8, 1).col(0);
  const LabeledVector sv({{"b", 2}}, s);
  const LabeledVector bv({{"a", 2}, {"b", 2}, {"c", 2}}, big);
  const auto got = partial_inner(sv, bv);
  // contract s against the middle factor
  Vector expect = Vector::Zero(4);
  for (Eigen::Index a = 0; a < 2; ++a)
    for (Eigen::Index b = 0; b < 2; ++b)
      for (Eigen::Index c = 0; c < 2; ++c)
        expect(a * 2 + c) += std::conj(s(b)) * big(a * 4 + b * 2 + c);
  EXPECT_NEAR((got.vector() - expect).cwiseAbs().maxCoeff(), 0.0, 1e-13);
  ASSERT_EQ(got.labels().size(), 2u);
  EXPECT_EQ(got.labels()[0].id, "a");
  EXPECT_EQ(got.labels()[1].id, "c");
}

//============================================================================
// Hermitian eigendecomposition
//============================================================================

TEST(HermitianEig, DiagonalCase) {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  const auto e = hermitian_eig(make_op({{"a", 3}}, d));
  Eigen::VectorXd expect(3);
  expect << 1.0, 2.0, 3.0;
  EXPECT_NEAR((e.values - expect).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(HermitianEig, PauliX) {
  Matrix sx = Matrix::Zero(2, 2);
  sx(0, 1) = sx(1, 0) = 1.0;
  const auto e = hermitian_eig(make_op({{"a", 2}}, sx));
  EXPECT_NEAR(e.values(0), -1.0, 1e-12);
  EXPECT_NEAR(e.values(1), 1.0, 1e-12);
}

TEST(HermitianEig, Reconstruction) {
  RngStream rng(26, 0);
  const Matrix h = random_hermitian(rng, 8);
  const auto e = hermitian_eig(make_op({{"a", 8}}, h));
  const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.adjoint();
  EXPECT_NEAR((back - h).cwiseAbs().maxCoeff(), 0.0, 1e-10);
  for (Eigen::Index i = 1; i < 8; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
}

TEST(HermitianEig, RejectsNonHermitian) {
  RngStream rng(27, 0);
  EXPECT_THROW(hermitian_eig(make_op({{"a", 3}}, random_matrix(rng, 3, 3))), NotHermitian);
}

TEST(MinEigenvalue, KnownValue) {
  Matrix sz = diag2(1.0, -1.0);
  EXPECT_NEAR(min_eigenvalue(sz), -1.0, 1e-12);
}
