#include "doctest.h"
#include "support.hpp"
#include "weylrec/exterior.hpp"

using namespace weylrec;
using weylrec::testing::Gen;
using weylrec::testing::max_abs;

TEST_CASE("multi-index bookkeeping") {
  const MultiIndex a(4, {0, 2});
  CHECK(a.size() == 2);
  CHECK(a.with(1) == MultiIndex(4, {0, 1, 2}));
  CHECK(a.without(2) == MultiIndex(4, {0}));
  CHECK(a.to_string() == "(1,3)");
  CHECK(MultiIndex::range(4, 1, 3) == MultiIndex(4, {1, 2}));
  CHECK_THROWS_AS(MultiIndex(4, {2, 1}), UsageError);
  CHECK_THROWS_AS(MultiIndex(4, {4}), UsageError);

  // e_(1,3) ^ e_(2,4) = -e_(1,2,3,4): one inversion (3 before 2).
  const Complement c = complement(a);
  CHECK(c.index == MultiIndex(4, {1, 3}));
  CHECK(c.sign == -1);
  CHECK(merge_sign(a.bits(), MultiIndex(4, {1}).bits()) == -1);
  CHECK(merge_sign(a.bits(), a.bits()) == 0);

  const int seq[] = {2, 0, 1};
  CHECK(permutation_sign(seq) == 1);
  const int odd[] = {1, 0, 2};
  CHECK(permutation_sign(odd) == -1);
}

TEST_CASE("grade bases are lexicographic with binomial sizes") {
  for (int n = 1; n <= 6; ++n)
    for (int m = 0; m <= n; ++m) {
      const auto& basis = grade_basis(n, m);
      CHECK(basis.size() == grade_dimension(n, m));
      for (std::size_t r = 0; r < basis.size(); ++r) CHECK(basis_rank(basis[r]) == r);
      for (std::size_t r = 1; r < basis.size(); ++r)
        CHECK(basis[r - 1].entries() < basis[r].entries());
    }
  CHECK(grade_dimension(5, 2) == 10);
}

TEST_CASE("wedge product: antisymmetry, associativity and determinants") {
  Gen g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = g.integer(3, 5);
    const CVector u = g.vector(n), v = g.vector(n), w = g.vector(n);
    const GradedTensor U = GradedTensor::vector(u), V = GradedTensor::vector(v), W = GradedTensor::vector(w);
    CHECK(max_abs((wedge(U, V) + wedge(V, U)).coeffs()) < 1e-14);
    CHECK(max_abs(wedge(U, U).coeffs()) < 1e-14);
    CHECK(max_abs((wedge(wedge(U, V), W) - wedge(U, wedge(V, W))).coeffs()) < 1e-13);

    const CMatrix M = g.matrix(n, n);
    CHECK(std::abs(wedge_columns(M).top() - M.determinant()) < 1e-12);
  }
  CHECK_THROWS_AS(wedge(GradedTensor(3, 2), GradedTensor(3, 2)), UsageError);
  CHECK_THROWS_AS(wedge(GradedTensor(3, 1), GradedTensor(4, 1)), UsageError);
}

TEST_CASE("derivation extension obeys the Leibniz rule and ends in the trace") {
  Gen g(12);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = g.integer(2, 5);
    const int a = g.integer(1, n - 1), b = g.integer(1, n - a);
    const CMatrix V = g.matrix(n, n);
    const GradedTensor u = wedge_columns(g.matrix(n, a)), w = wedge_columns(g.matrix(n, b));
    const GradedTensor lhs = act(derivation_extension(V, a + b), wedge(u, w));
    const GradedTensor rhs =
        wedge(act(derivation_extension(V, a), u), w) + wedge(u, act(derivation_extension(V, b), w));
    CHECK(max_abs((lhs - rhs).coeffs()) < 1e-12);
    CHECK(std::abs(derivation_extension(V, n)(0, 0) - V.trace()) < 1e-12);
    CHECK(max_abs(derivation_extension(V, 1) - V) == 0.0);

    CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(grade_dimension(n, a)),
                                static_cast<Eigen::Index>(grade_dimension(n, a)));
    accumulate_derivation_extension(V, a, cplx(0.0, 2.0), acc);
    CHECK(max_abs(acc - cplx(0.0, 2.0) * derivation_extension(V, a)) < 1e-14);
  }
}

TEST_CASE("multiplicative extension is a homomorphism that conjugates the derivation extension") {
  Gen g(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = g.integer(2, 5);
    const int m = g.integer(1, n);
    const CMatrix S = g.matrix(n, n) + 2.0 * CMatrix::Identity(n, n);
    const CMatrix T = g.matrix(n, n);
    const CMatrix V = g.matrix(n, n);
    CHECK(max_abs(multiplicative_extension(S * T, m) -
                  multiplicative_extension(S, m) * multiplicative_extension(T, m)) < 1e-11);
    const CMatrix Sm = multiplicative_extension(S, m);
    const CMatrix lhs = derivation_extension(S * V * S.inverse(), m);
    const CMatrix rhs = Sm * derivation_extension(V, m) * Sm.inverse();
    CHECK(max_abs(lhs - rhs) < 1e-9 * (1.0 + max_abs(rhs)));
    CHECK(std::abs(multiplicative_extension(T, n)(0, 0) - T.determinant()) < 1e-12);
  }
}

TEST_CASE("multiplicative extension maps wedges of columns to wedges of images") {
  Gen g(14);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = g.integer(2, 5);
    const int m = g.integer(1, n);
    const CMatrix T = g.matrix(n, n), U = g.matrix(n, m);
    CHECK(max_abs((act(multiplicative_extension(T, m), wedge_columns(U)) - wedge_columns(T * U)).coeffs()) <
          1e-12);
  }
}

TEST_CASE("entry extraction recovers every matrix entry") {
  Gen g(15);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = g.integer(2, 4);
    const CMatrix V = g.matrix(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) CHECK(std::abs(entry_extract(V, i, k) - V(i, k)) <= 1e-12);
  }
  // Hand-checkable case: the sub-diagonal entry of a 2x2 matrix.
  CMatrix V(2, 2);
  V << 1.0, 2.0, 3.0, 4.0;
  CHECK(entry_extract(V, 1, 0) == cplx(3.0));
  CHECK(entry_extract(V, 0, 1) == cplx(2.0));
  CHECK_THROWS_AS(entry_extract(V, 2, 0), UsageError);
}

TEST_CASE("tensor coefficient access and norms") {
  GradedTensor h(3, 2);
  h.set(MultiIndex(3, {0, 2}), cplx(0.0, 2.0));
  CHECK(h.coefficient(MultiIndex(3, {0, 2})) == cplx(0.0, 2.0));
  CHECK(h.norm() == doctest::Approx(2.0));
  CHECK_THROWS_AS(h.top(), UsageError);
  CHECK(GradedTensor::scalar(3, 5.0).coeffs()(0) == cplx(5.0));
  CHECK(GradedTensor::basis(MultiIndex(3, {1})).coeffs()(1) == cplx(1.0));
}
