#pragma once

// Potential recovery q(x) = (1/2 pi i) sum over rays of int_0^inf [B, Phat(x, rho)] d rho,
// taken as the limit of truncations at a common radius r on every ray.
//
// Each ray integrand carries an undamped oscillation of frequency x |b_i - b_j|
// (the pair tied on that ray), so the truncated sums oscillate in r. They are
// smoothed by box windows of one period per distinct frequency, applied
// `window_order` times, centred so that the window ends at r.

#include <iosfwd>
#include <span>
#include <vector>

#include "weylrec/numerics.hpp"
#include "weylrec/spectral.hpp"

namespace weylrec {

struct ReconstructionConfig {
  std::vector<double> x{0.5, 1.0, 2.0};
  std::vector<double> radii{10.0, 20.0, 40.0, 80.0};
  double inner = 1e-4;          // inner cutoff delta; [0, delta] by power-law endpoint estimate
  double knee = 1.0;            // geometric panels below, uniform panels above
  double ratio = 1.5;           // geometric growth of the inner panels
  double max_width = 1.0;       // uniform panel width cap
  double phase_per_panel = 4.0; // radians of the fastest oscillation per uniform panel
  int nodes = 10;               // Gauss-Legendre nodes per panel
  int window_order = 2;
  ExtrapolationMode mode = ExtrapolationMode::Averaging;
  SpectralConfig spectral;
  Execution execution = Execution::Parallel;
  int threads = 0;
};

/// Samples of [B, Phat(x, t w)] w along one ray (w the ray direction).
struct RayIntegral {
  int ray = 0;
  cplx direction;
  std::vector<double> x;
  int n = 0;
  PanelSamples samples;  // dim n*n*|x|, block per x, column-major
  CVector inner;         // estimate of the integral over (0, inner cutoff)
  double min_delta = 0;

  /// int_0^r [B, Phat(x_i, .)] d rho along the ray (no 1/(2 pi i) factor).
  CMatrix partial(std::size_t xi, double r) const;
  /// Integrand at the stored abscissa j.
  CMatrix integrand(std::size_t xi, std::size_t j) const;
};

/// Panel edges used for one reconstruction (shared by all rays).
std::vector<double> reconstruction_edges(const ValidatedSystem& system,
                                         const ReconstructionConfig& config);

RayIntegral ray_integral(const ValidatedSystem& system, int ray, const ReconstructionConfig& config);

/// (1/2 pi i) sum_rays int_0^r, symmetric truncation at the common radius r.
CMatrix truncated_sum(std::span<const RayIntegral> rays, std::size_t xi, double r);

/// Oscillation periods 2 pi / (x |b_i - b_j|) over the pairs tied on some ray.
std::vector<double> oscillation_periods(const ValidatedSystem& system, double x);

/// Windowed mean of f centred at c: nested box averages over each period.
CMatrix windowed_mean(const std::function<CMatrix(double)>& f, double c,
                      std::span<const double> periods, int order);

struct ReconstructionResult {
  std::vector<double> x;
  std::vector<double> radii;
  std::vector<std::vector<double>> window_radius;   // [x][radius]: window centre
  std::vector<std::vector<CMatrix>> partial;        // [radius][x]: raw truncated sum at r
  std::vector<std::vector<CMatrix>> averaged;       // [radius][x]
  std::vector<CMatrix> estimate;                    // [x]
  std::vector<CMatrix> truth;                       // [x]
  std::vector<std::vector<double>> history;         // [radius][x]: error of averaged vs truth
  std::vector<double> increments;                   // [radius-1]: max_x |avg_{j+1} - avg_j|
  std::vector<double> error;                        // [x]: entrywise error score (see entry_error)
  double max_diagonal = 0;
  double min_delta = 0;
  bool converged = false;
  std::size_t nodes = 0;
};

/// Relative error for entries with |truth| >= floor, else absolute error scaled so
/// that abs_tol maps to rel_tol (a score <= rel_tol passes both rules).
double entry_error(cplx estimate, cplx truth, double rel_tol = 0.05, double floor = 1e-4,
                   double abs_tol = 1e-5);
double matrix_error(const CMatrix& estimate, const CMatrix& truth);

ReconstructionResult reconstruct_q(const ValidatedSystem& system, const ReconstructionConfig& config);

/// x, then Re/Im of each q entry (row-major), true value, error score.
void write_reconstruction_csv(std::ostream& out, const ReconstructionResult& r);
/// r, x, norm of raw partial, norm of averaged value, error vs truth.
void write_history_csv(std::ostream& out, const ReconstructionResult& r);
nlohmann::json reconstruction_summary(const ReconstructionResult& r);

}  // namespace weylrec
