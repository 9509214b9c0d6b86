#pragma once

// Explicit first-order objects of the large-rho expansion of Weyl solutions:
//   qhat_o   off-diagonal, [B, qhat_o] = -q
//   d_k(x) = int_x^inf t^-1 ([qhat_o(t), A])_kk dt
//   qhat = qhat_o + d,   qtilde = qhat' + x^-1 [qhat, A]
// and the check that rho (Psi - Psi0) exp(-rho x R) - qhat f is diagonal in the
// frame f up to o(1) along interior rays.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "weylrec/parallel.hpp"
#include "weylrec/spectral.hpp"

namespace weylrec {

/// Entrywise -q_ij / (b_i - b_j), zero diagonal.
CMatrix qhat_o(const CMatrix& q, const CVector& b);

/// Symbolic L1 and Lp verdict for one entry of q, q' or qtilde.
struct Membership {
  std::string function;  // "q", "q'" or "qtilde"
  int i = 0;             // 0-based
  int j = 0;
  bool member = true;
  double l1 = 0;         // Gamma-function bound on the L1 norm (inf when not a member)
  double lp = 0;         // same for the Lp norm
  std::string reason;
};

class QHat {
 public:
  /// `tol` bounds the absolute quadrature error of each d_k.
  explicit QHat(const ValidatedSystem& system, double tol = 1e-13);

  CMatrix offdiagonal(double x) const;
  CMatrix offdiagonal_derivative(double x) const;
  /// Diagonal matrix d(x); x = 0 gives the limit d(0).
  CMatrix d(double x) const;
  /// Quadrature error bound of the last d(x) evaluation pattern (tail plus quadrature).
  double d_error(double x) const;
  CMatrix value(double x) const;
  CMatrix derivative(double x) const;
  CMatrix tilde(double x) const;

  /// Verdicts for q, q' and qtilde, every off-diagonal entry.
  std::vector<Membership> membership() const;
  bool tilde_integrable() const;

 private:
  // ([qhat_o(t), A])_kk as a function of t.
  cplx commutator_diag(int k, double t) const;
  double tail(double X) const;  // bound on sum_k int_X^inf t^-1 |[qhat_o, A]_kk| dt
  std::pair<cplx, double> integrate_d(int k, double x) const;

  ValidatedSystem system_;
  double tol_;
  double weight_;  // max_k sum_j (|A_jk| + |A_kj|) / |b_k - b_j|
};

/// Same as QHat::d for one x (convenience for the CLI and tests).
CMatrix d_matrix(const ValidatedSystem& system, double x, double tol = 1e-13);

struct FirstOrderConfig {
  std::vector<double> x{0.5, 1.0, 2.0};
  std::vector<double> radii{10.0, 20.0, 40.0, 80.0};
  double theta = 0.7853981633974483;  // arg rho, must lie strictly inside a sector
  double threshold = 0.05;            // final residual <= threshold * ||qhat(x)||_1
  SpectralConfig spectral;
  Execution execution = Execution::Parallel;
  int threads = 0;
};

struct FirstOrderReport {
  double theta = 0;
  int sector = 0;
  std::vector<double> x;
  std::vector<double> radii;
  // [radius][x]
  std::vector<std::vector<double>> residual;    // ||offdiag(f^-1 D)||_1
  std::vector<std::vector<double>> diagonal;    // ||diag(f^-1 D)||_1 (must stay bounded)
  std::vector<std::vector<double>> p_residual;  // ||offdiag(rho (P - I) - qhat)||_1
  std::vector<double> qhat_norm;                // [x] ||qhat(x)||_1
  std::vector<bool> decreasing;                 // [x]
  std::vector<bool> small;                      // [x] final residual under threshold
  double threshold = 0;

  bool passed() const;
};

/// D(rho) = rho (Psit - Psit0) - qhat f with Psit = Psi exp(-rho x R).
CMatrix first_order_matrix(const CMatrix& psi, const CMatrix& psi0, cplx rho, const CMatrix& qhat,
                        const CMatrix& frame);
double offdiagonal_norm(const CMatrix& m);
double diagonal_norm(const CMatrix& m);

FirstOrderReport first_order_residual(const ValidatedSystem& system, const FirstOrderConfig& config);

/// x, |rho|, residual, diagonal part, P residual, threshold value.
void write_residual_csv(std::ostream& out, const FirstOrderReport& r);
nlohmann::json first_order_summary(const FirstOrderReport& r);

}  // namespace weylrec
