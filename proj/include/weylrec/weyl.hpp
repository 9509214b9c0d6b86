#pragma once

// Fundamental tensors, characteristic functions and Weyl-type solutions of
// y' = (x^-1 A + q(x) + rho B) y for one spectral parameter rho and one sector.
//
// F_k = Psi_1 ^ ... ^ Psi_k is the flag of solutions decaying fastest at
// infinity; it is continued backward from X_inf, where it is anchored by the
// wedge of formal asymptotic series. T_k (grade n-k+1) is the flag regular at
// the origin, continued forward from x0 where it equals c_k ^ ... ^ c_n.
// Both are carried in scaled form, so that everything stays O(1):
//   Ft_k = exp(-rho x (R_1+...+R_k)) F_k,   Tt_k = exp(-rho x (R_k+...+R_n)) T_k.

#include <span>
#include <vector>

#include "weylrec/exterior.hpp"
#include "weylrec/model.hpp"
#include "weylrec/numerics.hpp"
#include "weylrec/unperturbed.hpp"

namespace weylrec {

struct FlowConfig {
  double x0 = 1e-4;              // regular anchor (reduced when |rho| x0 exceeds half the series radius)
  double far_min = 0.0;          // lower bound for X_inf
  double far_phase = 60.0;       // X_inf >= far_phase / (|rho| min|b_i - b_j|)
  double potential_tail = 1e-16; // X_inf >= point where the potential tail drops below this
  double frobenius_radius = 1.0;
  IntegratorConfig ode;
};

struct FundamentalTensors {
  cplx rho;
  int sector = 0;
  std::vector<double> x;   // ascending evaluation grid
  double near_anchor = 0;  // x0 actually used
  double far_anchor = 0;   // X_inf actually used
  double series_error = 0; // largest omitted formal-series term at X_inf
  double tail_bound = 0;   // potential mass beyond X_inf
  std::size_t steps = 0;
  // F[k][i] for k = 0..n (F[0] = 1); T[k][i] for k = 1..n (T[0] empty).
  std::vector<std::vector<GradedTensor>> F;
  std::vector<std::vector<GradedTensor>> T;
};

/// Integrates every flag needed by the Weyl solve. `q` may be empty (unperturbed).
/// The grid must be ascending and contained in (x0, X_inf).
FundamentalTensors fundamental_tensors(const ValidatedSystem& system, const PotentialModel& q,
                                       cplx rho, int sector, std::span<const double> x_grid,
                                       const FlowConfig& config = {},
                                       const FrobeniusBasis* frobenius = nullptr);

/// Delta_k = |F_{k-1} ^ T_k| at grid node i (k is 1-based).
cplx characteristic(const FundamentalTensors& t, int k, std::size_t i);

/// The n x n system for Psit_k = v + sum_j gamma_j f_j (f_j the frame columns).
struct WeylSystem {
  CMatrix m;
  CVector u;
};
WeylSystem assemble_weyl_system(const FundamentalTensors& t, const Sector& sector, std::size_t i,
                                int k, const CVector& v);

struct WeylEvaluation {
  double x = 0;
  cplx rho;
  CMatrix scaled;                   // Psit = Psi exp(-rho x R), columns k = 1..n
  CMatrix gamma;                    // Psit_k - v_k = sum_j gamma_jk f_j
  std::vector<cplx> delta;          // Delta_k, k = 1..n
  std::vector<double> condition;    // 2-norm condition number of each k system
  std::vector<double> residual_F;   // ||Ft_{k-1} ^ Psit_k - Ft_k|| / ||Ft_k||
  std::vector<double> residual_T;   // ||Psit_k ^ Tt_k|| / ||Tt_k||
  std::vector<std::string> warnings;

  CMatrix value(const Sector& sector) const;  // unscaled Psi
};

struct WeylOptions {
  double condition_limit = 1e10;
  double delta_floor = 1e-12;
};

/// Solves for all k at node i. `baseline` (n x n, scaled) supplies v_k; when null
/// v_k = f_k. Throws NumericalError when some |Delta_k| is below the floor.
WeylEvaluation solve_weyl(const FundamentalTensors& t, const Sector& sector, std::size_t i,
                          const CMatrix* baseline = nullptr, const WeylOptions& options = {});

/// Scaled Weyl matrices on the whole grid.
std::vector<WeylEvaluation> weyl_on_grid(const ValidatedSystem& system, const PotentialModel& q,
                                         cplx rho, int sector, std::span<const double> x_grid,
                                         const FlowConfig& config = {},
                                         const std::vector<CMatrix>* baseline = nullptr,
                                         const WeylOptions& options = {});

}  // namespace weylrec
