#pragma once

// Exterior algebra over C^n (n <= 8): ordered multi-indices, graded tensors with
// coefficients over the lexicographically ordered basis e_alpha, wedge products,
// and the derivation / multiplicative extensions of a matrix to a grade.
//
// Indices are 0-based throughout the code; e_alpha = e_{a_1} ^ ... ^ e_{a_m}
// with a_1 < ... < a_m. Signs are always obtained by counting inversions.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weylrec/errors.hpp"

namespace weylrec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr int kMaxDimension = 8;

class MultiIndex {
 public:
  MultiIndex() = default;
  /// Entries must be strictly increasing and within [0, n).
  MultiIndex(int n, std::span<const int> entries);
  MultiIndex(int n, std::initializer_list<int> entries);

  static MultiIndex from_bits(int n, std::uint32_t bits);
  /// (first, first+1, ..., last-1).
  static MultiIndex range(int n, int first, int last);

  int dimension() const { return n_; }
  int size() const;
  std::uint32_t bits() const { return bits_; }
  std::vector<int> entries() const;
  bool contains(int i) const { return (bits_ >> i) & 1u; }

  MultiIndex with(int i) const;
  MultiIndex without(int i) const;

  /// Sum of a_j over j in alpha; product likewise.
  template <class Seq>
  auto sum_over(const Seq& a) const {
    typename Seq::value_type acc{};
    for (int j : entries()) acc += a[j];
    return acc;
  }
  template <class Seq>
  auto product_over(const Seq& a) const {
    typename Seq::value_type acc{1};
    for (int j : entries()) acc *= a[j];
    return acc;
  }

  std::string to_string() const;  // 1-based, e.g. "(1,3)"

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  int n_ = 0;
  std::uint32_t bits_ = 0;
};

/// Complementary multi-index alpha' and chi_alpha = |e_alpha ^ e_alpha'|.
struct Complement {
  MultiIndex index;
  int sign;
};
Complement complement(const MultiIndex& alpha);

/// Sign of the permutation that sorts `seq` (distinct entries), by inversion count.
int permutation_sign(std::span<const int> seq);

/// Sign s with e_alpha ^ e_beta = s e_{alpha u beta}; 0 if they overlap.
int merge_sign(std::uint32_t alpha, std::uint32_t beta);

/// Lexicographically ordered basis of grade m.
const std::vector<MultiIndex>& grade_basis(int n, int m);
std::size_t basis_rank(const MultiIndex& alpha);
std::size_t grade_dimension(int n, int m);

class GradedTensor {
 public:
  GradedTensor() = default;
  GradedTensor(int n, int grade);  // zero tensor
  GradedTensor(int n, int grade, CVector coeffs);

  static GradedTensor basis(const MultiIndex& alpha);
  static GradedTensor scalar(int n, cplx value);
  static GradedTensor vector(const CVector& v);

  int dimension() const { return n_; }
  int grade() const { return grade_; }
  const CVector& coeffs() const { return coeffs_; }
  CVector& coeffs() { return coeffs_; }

  cplx coefficient(const MultiIndex& alpha) const;
  void set(const MultiIndex& alpha, cplx value);

  /// |h| for a top-grade tensor.
  cplx top() const;
  /// Sum of |h_alpha|.
  double norm() const;

  GradedTensor& operator+=(const GradedTensor& o);
  GradedTensor& operator-=(const GradedTensor& o);
  GradedTensor& operator*=(cplx s);
  friend GradedTensor operator+(GradedTensor a, const GradedTensor& b) { return a += b; }
  friend GradedTensor operator-(GradedTensor a, const GradedTensor& b) { return a -= b; }
  friend GradedTensor operator*(cplx s, GradedTensor a) { return a *= s; }

 private:
  void check_same(const GradedTensor& o) const;
  int n_ = 0;
  int grade_ = 0;
  CVector coeffs_;
};

/// Throws UsageError on grade overflow or dimension mismatch.
GradedTensor wedge(const GradedTensor& u, const GradedTensor& v);

/// u_1 ^ ... ^ u_m for the columns of `columns` (n x m).
GradedTensor wedge_columns(const CMatrix& columns);

/// V^(m): sum over positions of u_1 ^ ... ^ V u_j ^ ... ^ u_m, as a matrix on
/// the grade-m basis.
CMatrix derivation_extension(const CMatrix& V, int m);

/// Adds s * V^(m) to `out` without allocating; `out` must already have the grade size.
void accumulate_derivation_extension(const CMatrix& V, int m, cplx s, CMatrix& out);

/// V(h_1 ^ ... ^ h_m) = V h_1 ^ ... ^ V h_m; entries are m x m minors.
CMatrix multiplicative_extension(const CMatrix& V, int m);

/// Apply a grade operator to a tensor.
GradedTensor act(const CMatrix& op, const GradedTensor& h);

/// V_ik recovered through the wedge identities used in the asymptotic analysis
/// (0-based i, k). For i != k it is a single identity; for i == k the identity
/// yields the partial trace V_00 + ... + V_kk and the entry is the difference of
/// two consecutive partial traces.
cplx entry_extract(const CMatrix& V, int i, int k);

}  // namespace weylrec
