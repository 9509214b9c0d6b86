#pragma once

// Fundamental systems of the unperturbed equation y' = (z^-1 A + B) y:
// the Frobenius basis c_k(z) = z^{mu_k} chat_k(z) at the origin, the formal
// asymptotic series of e_k(z) ~ e^{z b_k}(e_k + O(1/z)) used to anchor the
// decaying solutions, nondegeneracy diagnostics (Delta0_k != 0) and the unperturbed Weyl matrix.

#include <vector>

#include "weylrec/model.hpp"
#include "weylrec/numerics.hpp"

namespace weylrec {

class FrobeniusBasis {
 public:
  FrobeniusBasis() = default;
  FrobeniusBasis(CVector mu, std::vector<std::vector<CVector>> coeffs, double radius);

  int dimension() const { return static_cast<int>(mu_.size()); }
  const CVector& mu() const { return mu_; }
  int order(int k) const { return static_cast<int>(coeffs_[static_cast<std::size_t>(k)].size()) - 1; }
  const std::vector<CVector>& coefficients(int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  double radius() const { return radius_; }

  /// chat_k(z) = sum_m c_{k,m} z^m.
  CVector entire_factor(int k, cplx z) const;
  /// c_k(z) with log z taken on the branch whose argument is nearest to `arg_hint`.
  CVector column(int k, cplx z, double arg_hint = 0.0) const;
  CMatrix matrix(cplx z, double arg_hint = 0.0) const;

  /// max_m ||(A - (mu_k + m) I) c_{k,m} + B c_{k,m-1}|| over all k, m.
  double recursion_residual(const CMatrix& A, const CVector& b) const;
  /// ||c_{k,M}|| radius^M summed over k: size of the last retained term.
  double tail_estimate() const;

 private:
  CVector mu_;
  std::vector<std::vector<CVector>> coeffs_;
  double radius_ = 1.0;
};

/// Coefficients from (A - (mu_k + m) I) c_{k,m} = -B c_{k,m-1}, c_{k,0} = h_k.
/// Truncation stops once two consecutive terms satisfy ||c_{k,m}|| r^m < 1e-16 ||h_k||.
FrobeniusBasis build_frobenius(const ValidatedSystem& system, double radius = 1.0,
                               int max_order = 400);

/// z^mu with arg z lifted to the branch nearest `arg_hint`.
cplx branch_power(cplx z, cplx mu, double arg_hint);

/// Formal solution u(z) = e^{-z b_j} e_j(z) = sum_m v_m z^-m, v_0 = e_j, summed up to
/// its smallest term. `tail` is the magnitude of the first omitted term.
struct SeriesValue {
  CVector u;
  double tail = 0;
  int terms = 0;
};
SeriesValue asymptotic_series(const CMatrix& A, const CVector& b, int j, cplx z,
                              int max_terms = 200);

/// Decaying flags E_k(x) = e_1 ^ ... ^ e_k evaluated along z = omega x on a real
/// grid, in scaled form exp(-z (R_1 + ... + R_k)) E_k. The first column e_1 is
/// kept as a vector as well.
struct AsymptoticBasis {
  int sector = 0;
  cplx omega;                 // unit direction of the ray z = omega x
  double anchor = 0;          // X_inf
  double anchor_error = 0;    // tail of the formal series at the anchor
  std::vector<double> x;
  std::vector<CVector> first;               // scaled e_1 at each x
  std::vector<std::vector<CVector>> flags;  // flags[k][i]: coefficients of E_k, k = 1..n
};

/// Backward continuation from X_inf of the scaled flags along direction omega
/// (which must lie in the closed sector).
AsymptoticBasis build_asymptotic(const ValidatedSystem& system, int sector, cplx omega,
                                 std::span<const double> x_grid, double anchor,
                                 const IntegratorConfig& ode = {});

struct NondegeneracyReport {
  int sector = 0;
  std::vector<cplx> delta;         // Delta0_k, k = 1..n (index k-1); Delta0_1 = 1
  std::vector<double> drift;       // relative change between the two evaluation points
  double min_abs = 0;
  bool passed = false;
};

/// Delta0_k = |E_{k-1} ^ c_k ^ ... ^ c_n| at z = omega x for x in {x1, x2} on the
/// sector bisector. Fails when some |Delta0_k| <= floor.
NondegeneracyReport check_nondegeneracy(const ValidatedSystem& system, int sector, double x1 = 1.0,
                                  double x2 = 2.0, double floor = 1e-8);

/// Psi0(x, rho) = psi0(rho x) on a real grid for one rho and one sector.
struct UnperturbedWeyl {
  int sector = 0;
  cplx rho;
  std::vector<double> x;
  std::vector<CMatrix> scaled;    // Psi0 exp(-rho x R)
  std::vector<cplx> delta;        // Delta0_k
  /// Unscaled Psi0(x, rho) (may overflow for large |rho x|).
  CMatrix value(std::size_t i, const Sector& sec) const;
};

UnperturbedWeyl build_unperturbed_weyl(const ValidatedSystem& system, int sector, cplx rho,
                                       std::span<const double> x_grid);

/// K = c(rho x)^-1 Psi0(x, rho): coefficients of psi0_k in the Frobenius basis.
/// psi0_k lies in span(c_k, ..., c_n), so K is lower triangular.
CMatrix connection_matrix(const ValidatedSystem& system, const FrobeniusBasis& frob, int sector,
                          cplx rho, double x);

}  // namespace weylrec
