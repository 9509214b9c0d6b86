#include "weylrec/spectral.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace weylrec {

CMatrix invert_small(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw UsageError("invert_small: matrix must be square");
  if (n > 3) return m.fullPivLu().inverse();
  const cplx det = m.determinant();
  if (std::abs(det) == 0.0) throw NumericalError("invert_small: singular matrix");
  CMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1.0;
  } else if (n == 2) {
    adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  } else {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        adj(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
      }
  }
  return adj / det;
}

SpectralMap spectral_map(const ValidatedSystem& system, cplx rho, int sector,
                         std::span<const double> x_grid, const SpectralConfig& config) {
  const Sector& sec = system.geometry.sectors.at(static_cast<std::size_t>(sector));
  const FrobeniusBasis frob = build_frobenius(system, config.flow.frobenius_radius);
  const PotentialModel none(system.dimension(), {});

  const FundamentalTensors t0 =
      fundamental_tensors(system, none, rho, sector, x_grid, config.flow, &frob);
  const FundamentalTensors t =
      fundamental_tensors(system, system.spec.potential, rho, sector, x_grid, config.flow, &frob);

  SpectralMap m;
  m.rho = rho;
  m.sector = sector;
  m.x = t.x;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    const WeylEvaluation e0 = solve_weyl(t0, sec, i, nullptr, config.weyl);
    const WeylEvaluation e = solve_weyl(t, sec, i, &e0.scaled, config.weyl);
    m.psi0.push_back(e0.scaled);
    m.psi.push_back(e.scaled);
    m.gamma.push_back(e.gamma);
    m.P.push_back(e.scaled * invert_small(e0.scaled));
    m.det_psi0 = std::max(m.det_psi0, std::abs(std::abs(e0.scaled.determinant()) - 1.0));
    if (i == 0) {
      m.delta = e.delta;
      m.delta0 = e0.delta;
    }
    m.warnings.insert(m.warnings.end(), e.warnings.begin(), e.warnings.end());
    m.warnings.insert(m.warnings.end(), e0.warnings.begin(), e0.warnings.end());
  }
  return m;
}

namespace {

double min_abs(const std::vector<cplx>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (const cplx& z : v) m = std::min(m, std::abs(z));
  return m;
}

}  // namespace

BoundarySample boundary_values(const ValidatedSystem& system, int ray, double t,
                               std::span<const double> x_grid, const SpectralConfig& config) {
  const SectorGeometry& g = system.geometry;
  if (ray < 0 || ray >= g.count()) throw UsageError("boundary_values: ray index out of range");
  if (!(t > 0.0)) throw UsageError("boundary_values: |rho| must be positive");
  BoundarySample s;
  s.ray = ray;
  s.t = t;
  s.rho = std::polar(t, g.rays[static_cast<std::size_t>(ray)]);
  const SpectralMap minus = spectral_map(system, s.rho, g.before(ray), x_grid, config);
  const SpectralMap plus = spectral_map(system, s.rho, g.after(ray), x_grid, config);
  s.x = minus.x;
  s.P_minus = minus.P;
  s.P_plus = plus.P;
  for (std::size_t i = 0; i < s.x.size(); ++i) s.P_hat.push_back(plus.P[i] - minus.P[i]);
  s.min_delta = std::min(min_abs(minus.delta), min_abs(plus.delta));
  return s;
}

std::vector<BoundarySample> sample_ray(const ValidatedSystem& system, int ray,
                                       std::span<const double> t, std::span<const double> x_grid,
                                       const SpectralConfig& config, Execution mode, int threads) {
  std::vector<BoundarySample> out(t.size());
  for_each_index(
      t.size(), mode, [&](std::size_t j) { out[j] = boundary_values(system, ray, t[j], x_grid, config); },
      threads);
  return out;
}

std::vector<SpectralMap> sample_sector(const ValidatedSystem& system, int sector,
                                       std::span<const cplx> rho, std::span<const double> x_grid,
                                       const SpectralConfig& config, Execution mode, int threads) {
  std::vector<SpectralMap> out(rho.size());
  for_each_index(
      rho.size(), mode,
      [&](std::size_t j) { out[j] = spectral_map(system, rho[j], sector, x_grid, config); }, threads);
  return out;
}

void write_jsonl(std::ostream& out, const BoundarySample& s) {
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    nlohmann::json j;
    j["x"] = s.x[i];
    j["rho"] = complex_to_json(s.rho);
    j["ray_index"] = s.ray;
    j["P_hat"] = matrix_to_json(s.P_hat[i]);
    out << j.dump() << '\n';
  }
}

std::vector<BoundarySample> read_jsonl(std::istream& in) {
  std::vector<BoundarySample> out;
  std::map<std::pair<int, std::pair<double, double>>, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("sample store line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("x") || !j.contains("rho") || !j.contains("ray_index") || !j.contains("P_hat"))
      throw InputError("sample store line " + std::to_string(lineno) + " lacks a field");
    const cplx rho = complex_from_json(j["rho"]);
    const int ray = j["ray_index"].get<int>();
    const auto key = std::make_pair(ray, std::make_pair(rho.real(), rho.imag()));
    auto it = index.find(key);
    if (it == index.end()) {
      BoundarySample s;
      s.ray = ray;
      s.rho = rho;
      s.t = std::abs(rho);
      out.push_back(std::move(s));
      it = index.emplace(key, out.size() - 1).first;
    }
    BoundarySample& s = out[it->second];
    const auto& rows = j["P_hat"];
    const auto n = static_cast<Eigen::Index>(rows.size());
    CMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (rows[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(n))
        throw InputError("sample store line " + std::to_string(lineno) + ": P_hat is not square");
      for (Eigen::Index c = 0; c < n; ++c)
        m(r, c) = complex_from_json(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    }
    s.x.push_back(j["x"].get<double>());
    s.P_hat.push_back(std::move(m));
  }
  return out;
}

}  // namespace weylrec
