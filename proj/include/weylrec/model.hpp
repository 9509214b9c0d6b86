#pragma once

// System description y' = (x^-1 A + q(x) + rho B) y: validation of the
// structural hypotheses, the parametric potential family, the separation rays
// of the spectral plane, and JSON I/O for system files.

#include <complex>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "weylrec/errors.hpp"

namespace weylrec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// c * x^a * exp(-sigma x)
struct PotentialTerm {
  cplx c;
  double a = 1.0;
  double sigma = 1.0;
};

/// One matrix entry (0-based i, j) of the potential.
struct PotentialEntry {
  int i = 0;
  int j = 0;
  std::vector<PotentialTerm> terms;
};

class PotentialModel {
 public:
  PotentialModel() = default;
  PotentialModel(int n, std::vector<PotentialEntry> entries);

  int dimension() const { return n_; }
  const std::vector<PotentialEntry>& entries() const { return entries_; }
  bool empty() const;

  CMatrix evaluate(double x) const;
  CMatrix derivative(double x) const;
  /// Adds s * q(x) into `out` (n x n).
  void accumulate(double x, cplx s, CMatrix& out) const;

  /// Bound on sum over entries of int_X^inf |q_ij(t)| dt (valid for X >= max a/sigma).
  double tail_bound(double X) const;
  /// Smallest X (>= 1) with tail_bound(X) <= tol.
  double cutoff(double tol) const;

  PotentialModel scaled(double s) const;

 private:
  int n_ = 0;
  std::vector<PotentialEntry> entries_;
};

struct SystemSpec {
  std::string name;
  CMatrix A;
  CVector b;  // diagonal of B
  PotentialModel potential;
  double p = 4.0;  // integrability exponent of X_p

  int dimension() const { return static_cast<int>(b.size()); }
  CMatrix B() const { return b.asDiagonal(); }
  SystemSpec with_potential(PotentialModel q) const;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;
  std::vector<std::string> warnings;  // conditioning notes, never failures
  bool passed() const;
  const Check* first_failure() const;
  std::string summary() const;
};

/// One open sector between consecutive rays (angles in radians, begin < end).
struct Sector {
  double begin = 0;
  double end = 0;
  double bisector = 0;
  std::vector<int> order;  // order[k] = j with R_k = b_j
  CVector R;               // growth ordering R_1, ..., R_n
  CMatrix frame;           // permutation matrix with (R_1..R_n) = (b_1..b_n) frame
  double margin = 0;       // min_k Re((R_{k+1}-R_k) e^{i bisector}) / max|b|

  /// Determinant of `frame` (+1 or -1).
  int frame_sign() const;
};

/// Rays theta_0 < ... < theta_{N-1} in [0, 2pi). Sector s spans
/// (theta_{s-1}, theta_s) with theta_{-1} = theta_{N-1} - 2pi, so ray s separates
/// sector s (clockwise side) from sector s+1 mod N (counterclockwise side).
struct SectorGeometry {
  std::vector<double> rays;
  std::vector<std::vector<std::pair<int, int>>> ray_pairs;  // (j, k) producing each ray
  std::vector<Sector> sectors;
  bool degenerate = false;  // two different pairs share a ray

  int count() const { return static_cast<int>(rays.size()); }
  /// Sector containing direction angle `theta`; throws UsageError on a ray.
  int sector_of(double theta) const;
  int before(int ray) const { return ray; }
  int after(int ray) const { return (ray + 1) % count(); }
};

/// Orders by Re(b_j e^{i theta}) ascending. Requires distinct real parts.
std::vector<int> growth_order(const CVector& b, double theta);

SectorGeometry sector_geometry(const CVector& b);

ValidationReport validate(const SystemSpec& spec);

/// A spec that passed validation, with the cached spectral data of A.
struct ValidatedSystem {
  SystemSpec spec;
  CVector mu;          // eigenvalues of A, Re ascending
  CMatrix H;           // eigenvectors as columns, det H = 1
  SectorGeometry geometry;
  ValidationReport report;

  int dimension() const { return spec.dimension(); }
};

/// Throws AssumptionError carrying the first failed check.
ValidatedSystem require_valid(const SystemSpec& spec);

// ---------------------------------------------------------------------------
// JSON: complex as [re, im] (plain numbers accepted), matrices row-major,
// potential as [{i, j, terms: [{c, a, sigma}]}] with 1-based indices.

SystemSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SystemSpec& spec);
SystemSpec load_spec(const std::filesystem::path& path);

nlohmann::json complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const CMatrix& m);

}  // namespace weylrec
