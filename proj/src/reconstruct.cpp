#include "weylrec/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace weylrec {

namespace {

constexpr int kWindowNodes = 24;

double max_gap(const CVector& b) {
  double g = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i)
    for (Eigen::Index j = i + 1; j < b.size(); ++j) g = std::max(g, std::abs(b[i] - b[j]));
  return g;
}

// Power-law fit f ~ c t^a through the first two samples, integrated over (0, t1).
cplx endpoint_estimate(double t1, cplx f1, double t2, cplx f2) {
  if (std::abs(f1) == 0.0) return 0.0;
  double a = 0.0;
  if (std::abs(f2) > 0.0) a = std::log(std::abs(f2) / std::abs(f1)) / std::log(t2 / t1);
  a = std::clamp(a, -0.5, 4.0);
  return f1 * t1 / (1.0 + a);
}

}  // namespace

std::vector<double> reconstruction_edges(const ValidatedSystem& system,
                                         const ReconstructionConfig& c) {
  if (c.radii.empty() || c.x.empty()) throw UsageError("reconstruction needs radii and x values");
  const double xmax = *std::max_element(c.x.begin(), c.x.end());
  const double width = std::min(c.max_width, c.phase_per_panel / (xmax * max_gap(system.spec.b)));
  const double outer = *std::max_element(c.radii.begin(), c.radii.end());
  if (!(outer > c.knee)) throw UsageError("largest radius must exceed the panel knee");
  return panel_edges(c.inner, c.knee, outer, c.ratio, width, c.radii);
}

CMatrix RayIntegral::partial(std::size_t xi, double r) const {
  const CVector v = samples.cumulative(r);
  const auto block = static_cast<Eigen::Index>(n * n);
  CVector seg = v.segment(static_cast<Eigen::Index>(xi) * block, block);
  if (r > samples.edges().front()) seg += inner.segment(static_cast<Eigen::Index>(xi) * block, block);
  return Eigen::Map<const CMatrix>(seg.data(), n, n);
}

CMatrix RayIntegral::integrand(std::size_t xi, std::size_t j) const {
  const auto block = static_cast<Eigen::Index>(n * n);
  const CVector seg = samples.values()[j].segment(static_cast<Eigen::Index>(xi) * block, block);
  return Eigen::Map<const CMatrix>(seg.data(), n, n);
}

RayIntegral ray_integral(const ValidatedSystem& system, int ray, const ReconstructionConfig& c) {
  const int n = system.dimension();
  RayIntegral out;
  out.ray = ray;
  out.direction = std::polar(1.0, system.geometry.rays.at(static_cast<std::size_t>(ray)));
  out.x = c.x;
  out.n = n;
  const auto block = static_cast<Eigen::Index>(n * n);
  out.samples = PanelSamples(reconstruction_edges(system, c), c.nodes,
                             block * static_cast<Eigen::Index>(c.x.size()));

  const auto& t = out.samples.abscissae();
  const std::vector<BoundarySample> jumps =
      sample_ray(system, ray, t, c.x, c.spectral, c.execution, c.threads);

  const CVector& b = system.spec.b;
  out.min_delta = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t.size(); ++j) {
    CVector& v = out.samples.values()[j];
    out.min_delta = std::min(out.min_delta, jumps[j].min_delta);
    for (std::size_t xi = 0; xi < c.x.size(); ++xi) {
      const CMatrix& ph = jumps[j].P_hat[xi];
      for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row)
          // ([B, Phat])_{row,col} = (b_row - b_col) Phat_{row,col}; the diagonal is exactly 0.
          v[static_cast<Eigen::Index>(xi) * block + col * n + row] =
              (row == col) ? cplx{} : (b[row] - b[col]) * ph(row, col) * out.direction;
    }
  }
  out.samples.finalize();

  out.inner = CVector::Zero(out.samples.dim());
  for (Eigen::Index k = 0; k < out.samples.dim(); ++k)
    out.inner[k] = endpoint_estimate(t[0], out.samples.values()[0][k], t[1], out.samples.values()[1][k]);
  return out;
}

CMatrix truncated_sum(std::span<const RayIntegral> rays, std::size_t xi, double r) {
  if (rays.empty()) throw UsageError("truncated_sum: no rays");
  CMatrix acc = CMatrix::Zero(rays.front().n, rays.front().n);
  for (const auto& ray : rays) acc += ray.partial(xi, r);
  return acc / cplx(0.0, 2.0 * std::numbers::pi);
}

std::vector<double> oscillation_periods(const ValidatedSystem& system, double x) {
  std::vector<double> periods;
  for (const auto& pairs : system.geometry.ray_pairs)
    for (const auto& [j, k] : pairs) {
      const double T = 2.0 * std::numbers::pi / (x * std::abs(system.spec.b[j] - system.spec.b[k]));
      const bool seen = std::any_of(periods.begin(), periods.end(),
                                    [T](double p) { return std::abs(p - T) <= 1e-9 * T; });
      if (!seen) periods.push_back(T);
    }
  std::sort(periods.begin(), periods.end());
  return periods;
}

CMatrix windowed_mean(const std::function<CMatrix(double)>& f, double c,
                      std::span<const double> periods, int order) {
  std::vector<double> widths;
  for (int o = 0; o < order; ++o) widths.insert(widths.end(), periods.begin(), periods.end());
  const GaussRule& g = gauss_legendre(kWindowNodes);
  std::function<CMatrix(double, std::size_t)> level = [&](double centre, std::size_t depth) -> CMatrix {
    if (depth == widths.size()) return f(centre);
    const double half = 0.5 * widths[depth];
    CMatrix acc;
    for (int i = 0; i < kWindowNodes; ++i) {
      CMatrix v = 0.5 * g.weights[static_cast<std::size_t>(i)] *
                  level(centre + half * g.nodes[static_cast<std::size_t>(i)], depth + 1);
      if (i == 0) acc = std::move(v);
      else acc += v;
    }
    return acc;
  };
  return level(c, 0);
}

double entry_error(cplx estimate, cplx truth, double rel_tol, double floor, double abs_tol) {
  const double diff = std::abs(estimate - truth);
  if (std::abs(truth) >= floor) return diff / std::abs(truth);
  return diff * rel_tol / abs_tol;
}

double matrix_error(const CMatrix& estimate, const CMatrix& truth) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i)
    for (Eigen::Index j = 0; j < truth.cols(); ++j)
      worst = std::max(worst, entry_error(estimate(i, j), truth(i, j)));
  return worst;
}

ReconstructionResult reconstruct_q(const ValidatedSystem& system, const ReconstructionConfig& c) {
  if (c.radii.size() < 2) throw UsageError("reconstruction needs at least two radii");
  for (std::size_t i = 1; i < c.radii.size(); ++i)
    if (!(c.radii[i] > c.radii[i - 1])) throw UsageError("radii must increase");
  if (c.window_order < 0) throw UsageError("window order must be non-negative");
  for (std::size_t i = 1; i < c.x.size(); ++i)
    if (!(c.x[i] > c.x[i - 1])) throw UsageError("x values must increase");

  std::vector<RayIntegral> rays;
  for (int ray = 0; ray < system.geometry.count(); ++ray) rays.push_back(ray_integral(system, ray, c));

  ReconstructionResult res;
  res.x = c.x;
  res.radii = c.radii;
  res.min_delta = std::numeric_limits<double>::infinity();
  for (const auto& r : rays) {
    res.nodes += r.samples.abscissae().size();
    res.min_delta = std::min(res.min_delta, r.min_delta);
  }
  const std::size_t nx = c.x.size(), nr = c.radii.size();
  res.partial.assign(nr, std::vector<CMatrix>(nx));
  res.averaged.assign(nr, std::vector<CMatrix>(nx));
  res.history.assign(nr, std::vector<double>(nx));
  res.window_radius.assign(nx, std::vector<double>(nr));

  for (std::size_t xi = 0; xi < nx; ++xi) {
    res.truth.push_back(system.spec.potential.evaluate(c.x[xi]));
    const std::vector<double> periods = oscillation_periods(system, c.x[xi]);
    double reach = 0.0;
    for (double T : periods) reach += 0.5 * T * c.window_order;
    auto sum_at = [&](double r) { return truncated_sum(rays, xi, r); };
    for (std::size_t k = 0; k < nr; ++k) {
      const double centre = c.radii[k] - reach;
      res.window_radius[xi][k] = centre;
      res.partial[k][xi] = sum_at(c.radii[k]);
      res.averaged[k][xi] = windowed_mean(sum_at, centre, periods, c.window_order);
      res.history[k][xi] = matrix_error(res.averaged[k][xi], res.truth[xi]);
    }

    std::vector<CVector> seq;
    for (std::size_t k = 0; k < nr; ++k)
      seq.push_back(Eigen::Map<const CVector>(res.averaged[k][xi].data(), res.averaged[k][xi].size()));
    CMatrix estimate = res.averaged[nr - 1][xi];
    if (c.mode == ExtrapolationMode::Richardson && nr >= 3) {
      const ExtrapolationResult ex = extrapolate(res.window_radius[xi], seq, ExtrapolationMode::Richardson, 1);
      estimate = Eigen::Map<const CMatrix>(ex.estimate.data(), estimate.rows(), estimate.cols());
    }
    res.estimate.push_back(estimate);
    res.error.push_back(matrix_error(estimate, res.truth[xi]));
    for (Eigen::Index d = 0; d < estimate.rows(); ++d)
      res.max_diagonal = std::max(res.max_diagonal, std::abs(estimate(d, d)));
  }

  // Convergence: increments of the averaged sequence must shrink, or sit at the
  // quadrature noise floor.
  double scale = 0.0;
  for (const auto& m : res.estimate) scale = std::max(scale, m.cwiseAbs().maxCoeff());
  for (std::size_t k = 1; k < nr; ++k) {
    double inc = 0.0;
    for (std::size_t xi = 0; xi < nx; ++xi)
      inc = std::max(inc, (res.averaged[k][xi] - res.averaged[k - 1][xi]).cwiseAbs().maxCoeff());
    res.increments.push_back(inc);
  }
  const double noise = 1e-9 + 1e-6 * scale;
  res.converged = true;
  for (std::size_t k = 1; k < res.increments.size(); ++k)
    if (res.increments[k] > res.increments[k - 1] && res.increments[k] > noise) res.converged = false;
  return res;
}

void write_reconstruction_csv(std::ostream& out, const ReconstructionResult& r) {
  out.precision(12);
  const Eigen::Index n = r.estimate.empty() ? 0 : r.estimate.front().rows();
  out << "x,i,j,re,im,true_re,true_im,error\n";
  for (std::size_t xi = 0; xi < r.x.size(); ++xi)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const cplx e = r.estimate[xi](i, j), t = r.truth[xi](i, j);
        out << r.x[xi] << ',' << i + 1 << ',' << j + 1 << ',' << e.real() << ',' << e.imag() << ','
            << t.real() << ',' << t.imag() << ',' << entry_error(e, t) << '\n';
      }
}

void write_history_csv(std::ostream& out, const ReconstructionResult& r) {
  out.precision(12);
  out << "r,x,window_centre,partial_norm,averaged_norm,error\n";
  for (std::size_t k = 0; k < r.radii.size(); ++k)
    for (std::size_t xi = 0; xi < r.x.size(); ++xi)
      out << r.radii[k] << ',' << r.x[xi] << ',' << r.window_radius[xi][k] << ','
          << r.partial[k][xi].cwiseAbs().sum() << ',' << r.averaged[k][xi].cwiseAbs().sum() << ','
          << r.history[k][xi] << '\n';
}

nlohmann::json reconstruction_summary(const ReconstructionResult& r) {
  nlohmann::json j;
  double worst = 0.0;
  for (double e : r.error) worst = std::max(worst, e);
  j["max_error"] = worst;
  j["max_diagonal"] = r.max_diagonal;
  j["converged"] = r.converged;
  j["min_delta"] = r.min_delta;
  j["nodes"] = r.nodes;
  j["radii"] = r.radii;
  j["x"] = r.x;
  j["increments"] = r.increments;
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t xi = 0; xi < r.x.size(); ++xi) {
    nlohmann::json hist = nlohmann::json::array();
    for (std::size_t k = 0; k < r.radii.size(); ++k) hist.push_back(r.history[k][xi]);
    per.push_back({{"x", r.x[xi]},
                   {"error", r.error[xi]},
                   {"estimate", matrix_to_json(r.estimate[xi])},
                   {"history", hist}});
  }
  j["points"] = per;
  return j;
}

}  // namespace weylrec
