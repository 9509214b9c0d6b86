#pragma once

// Shared numerical kernels: adaptive integration of complex linear ODEs along
// straight segments in the complex plane, Gauss-Legendre quadrature (adaptive
// and panelled), and limit extrapolation of partial-sum sequences.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "weylrec/errors.hpp"

namespace weylrec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct IntegratorConfig {
  double rtol = 1e-11;
  double atol = 1e-14;
  // Step bounds are measured in units of the path parameter s in [0, 1].
  double max_step = 1.0;
  double min_step = 1e-15;
  int max_steps = 5'000'000;

  void validate() const;
};

/// Linear system dy/dz = M(z) y integrated along the segment start -> end.
struct PathODEProblem {
  cplx start;
  cplx end;
  // Fills `out` (already sized dim x dim) with M(z).
  std::function<void(cplx z, CMatrix& out)> coefficient;
  CVector initial;
};

struct PathSolution {
  std::vector<CVector> values;  // one per requested node, same order
  std::size_t steps = 0;
  std::size_t rejected = 0;
  // Max-norm difference against a tighter-tolerance re-solve; NaN unless requested.
  double global_error = std::numeric_limits<double>::quiet_NaN();
};

/// Dormand-Prince 8(5,3) embedded pair with step clipping so that every
/// requested node is hit exactly. Nodes must lie on the segment and be ordered
/// from start to end.
PathSolution integrate_linear(const PathODEProblem& problem, std::span<const cplx> nodes,
                              const IntegratorConfig& config, bool estimate_global_error = false);

/// Convenience form for real intervals.
PathSolution integrate_linear_real(double a, double b,
                                   const std::function<void(double x, CMatrix& out)>& coefficient,
                                   const CVector& initial, std::span<const double> nodes,
                                   const IntegratorConfig& config);

// ---------------------------------------------------------------------------
// Quadrature

struct GaussRule {
  std::vector<double> nodes;  // on [-1, 1], ascending
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule; cached, thread-safe.
const GaussRule& gauss_legendre(int m);

struct QuadResult {
  cplx value;
  double error;
  int intervals;
};

/// Adaptive bisection with a 10-point Gauss-Legendre base rule. The error is the
/// accumulated |coarse - refined| over accepted intervals, which bounds the
/// refined estimate's error in practice. Throws NumericalError on max_depth.
QuadResult quad_adaptive(const std::function<cplx(double)>& f, double a, double b, double tol,
                         int max_depth = 40);

/// Composite Gauss-Legendre samples of a vector-valued integrand on fixed panels.
/// Supports the running integral at any abscissa through the per-panel Legendre
/// interpolant, so truncations need not fall on panel edges.
class PanelSamples {
 public:
  PanelSamples() = default;
  PanelSamples(std::vector<double> edges, int nodes_per_panel, Eigen::Index dim);

  /// Abscissae in panel order; fill values() in the same order.
  const std::vector<double>& abscissae() const { return abscissae_; }
  std::vector<CVector>& values() { return values_; }
  const std::vector<CVector>& values() const { return values_; }
  const std::vector<double>& edges() const { return edges_; }
  int nodes_per_panel() const { return m_; }
  Eigen::Index dim() const { return dim_; }

  /// Must be called once after values are filled.
  void finalize();

  /// Integral from edges().front() to s, s within the panel range.
  CVector cumulative(double s) const;
  CVector total() const;

 private:
  std::vector<double> edges_;
  int m_ = 0;
  Eigen::Index dim_ = 0;
  std::vector<double> abscissae_;
  std::vector<CVector> values_;
  std::vector<CVector> prefix_;                 // integral up to each panel's left edge
  std::vector<std::vector<CVector>> legendre_;  // per panel Legendre coefficients
};

/// Geometric panel edges from `inner` up to `knee`, then uniform panels of width
/// `width` up to `outer`. Every value in `breakpoints` in range becomes an edge.
std::vector<double> panel_edges(double inner, double knee, double outer, double ratio,
                                double width, std::span<const double> breakpoints = {});

// ---------------------------------------------------------------------------
// Extrapolation

enum class ExtrapolationMode { Averaging, Richardson };

struct ExtrapolationResult {
  CVector estimate;
  std::vector<double> increments;  // |a_{k+1} - a_k|
  bool oscillation_decreasing = true;
};

/// Limit of a_k indexed by radii r_k (increasing, at least three entries).
/// Averaging: trapezoid mean of a(r) over the trailing half of the radius range.
/// Richardson: eliminates c1/r (order 1) or c1/r + c2/r^2 (order 2) from the last entries.
ExtrapolationResult extrapolate(std::span<const double> radii, std::span<const CVector> partials,
                                ExtrapolationMode mode, int order = 1);

}  // namespace weylrec
