#pragma once

// Spectral mappings matrix P(x, rho) = Psi(x, rho) Psi0(x, rho)^-1, its
// one-sided values on the separation rays and the jump Phat = P+ - P-.
// P- uses the data of the sector on the clockwise side of the ray, P+ the
// sector on the counterclockwise side.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "weylrec/model.hpp"
#include "weylrec/parallel.hpp"
#include "weylrec/weyl.hpp"

namespace weylrec {

struct SpectralConfig {
  FlowConfig flow;
  WeylOptions weyl;
};

struct SpectralMap {
  cplx rho;
  int sector = 0;
  std::vector<double> x;
  std::vector<CMatrix> P;
  std::vector<CMatrix> psi;    // scaled Psi
  std::vector<CMatrix> psi0;   // scaled Psi0
  std::vector<CMatrix> gamma;  // frame coordinates of Psit - Psit0
  std::vector<cplx> delta;     // Delta_k(rho), k = 1..n, taken at the first grid node
  std::vector<cplx> delta0;    // unperturbed Delta_k
  double det_psi0 = 0;         // max over the grid of | |det Psit0| - 1 |
  std::vector<std::string> warnings;
};

/// Inverse by adjugate for n <= 3, pivoted LU above.
CMatrix invert_small(const CMatrix& m);

SpectralMap spectral_map(const ValidatedSystem& system, cplx rho, int sector,
                         std::span<const double> x_grid, const SpectralConfig& config = {});

struct BoundarySample {
  int ray = 0;
  double t = 0;  // |rho|
  cplx rho;
  std::vector<double> x;
  std::vector<CMatrix> P_minus;
  std::vector<CMatrix> P_plus;
  std::vector<CMatrix> P_hat;
  double min_delta = 0;  // min_k |Delta_k| over both sides
};

BoundarySample boundary_values(const ValidatedSystem& system, int ray, double t,
                               std::span<const double> x_grid, const SpectralConfig& config = {});

/// Boundary values at |rho| = t_j on one ray, in the order of `t`.
std::vector<BoundarySample> sample_ray(const ValidatedSystem& system, int ray,
                                       std::span<const double> t, std::span<const double> x_grid,
                                       const SpectralConfig& config = {},
                                       Execution mode = Execution::Parallel, int threads = 0);

/// Spectral maps at arbitrary rho inside (or on the boundary of) one sector.
std::vector<SpectralMap> sample_sector(const ValidatedSystem& system, int sector,
                                       std::span<const cplx> rho, std::span<const double> x_grid,
                                       const SpectralConfig& config = {},
                                       Execution mode = Execution::Parallel, int threads = 0);

/// One JSON object per (sample, x): {x, rho, ray_index, P_hat}.
void write_jsonl(std::ostream& out, const BoundarySample& s);
/// Parses lines written by write_jsonl; samples sharing (ray, rho) are regrouped.
std::vector<BoundarySample> read_jsonl(std::istream& in);

}  // namespace weylrec
