#include "weylrec/model.hpp"

#include "weylrec/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace weylrec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string fmt(cplx z) {
  std::ostringstream s;
  s.precision(6);
  s << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return s.str();
}

double term_abs_integral_from(const PotentialTerm& t, double X) {
  // int_X^inf |c| t^a e^{-sigma t} dt, bounded piecewise: the integrand peaks at a/sigma
  // and decays at least like e^{-sigma t / 2} beyond 2a/sigma.
  const double c = std::abs(t.c);
  const double knee = 2.0 * t.a / t.sigma;
  double bound = 0.0;
  double start = X;
  if (X < knee) {
    const double peak = std::pow(t.a / t.sigma, t.a) * std::exp(-t.a);
    bound += c * peak * (knee - X);
    start = knee;
  }
  bound += c * std::pow(start, t.a) * std::exp(-t.sigma * start) * 2.0 / t.sigma;
  return bound;
}

}  // namespace

// ---------------------------------------------------------------------------
// PotentialModel

PotentialModel::PotentialModel(int n, std::vector<PotentialEntry> entries)
    : n_(n), entries_(std::move(entries)) {
  for (const auto& e : entries_)
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
      throw InputError("potential entry index outside the system dimension");
}

bool PotentialModel::empty() const {
  for (const auto& e : entries_)
    for (const auto& t : e.terms)
      if (t.c != cplx{}) return false;
  return true;
}

void PotentialModel::accumulate(double x, cplx s, CMatrix& out) const {
  for (const auto& e : entries_) {
    cplx v{};
    for (const auto& t : e.terms) v += t.c * std::pow(x, t.a) * std::exp(-t.sigma * x);
    out(e.i, e.j) += s * v;
  }
}

CMatrix PotentialModel::evaluate(double x) const {
  CMatrix q = CMatrix::Zero(n_, n_);
  accumulate(x, 1.0, q);
  return q;
}

CMatrix PotentialModel::derivative(double x) const {
  CMatrix dq = CMatrix::Zero(n_, n_);
  for (const auto& e : entries_) {
    cplx v{};
    for (const auto& t : e.terms) {
      // d/dx x^a e^{-sx} = (a x^{a-1} - s x^a) e^{-sx}; a x^{a-1} is 1 at a = 1, x = 0
      const double lead = (t.a == 1.0) ? 1.0 : t.a * std::pow(x, t.a - 1.0);
      v += t.c * (lead - t.sigma * std::pow(x, t.a)) * std::exp(-t.sigma * x);
    }
    dq(e.i, e.j) += v;
  }
  return dq;
}

double PotentialModel::tail_bound(double X) const {
  double total = 0.0;
  for (const auto& e : entries_)
    for (const auto& t : e.terms) total += term_abs_integral_from(t, X);
  return total;
}

double PotentialModel::cutoff(double tol) const {
  double X = 1.0;
  while (tail_bound(X) > tol && X < 1e6) X *= 1.25;
  return X;
}

PotentialModel PotentialModel::scaled(double s) const {
  PotentialModel q = *this;
  for (auto& e : q.entries_)
    for (auto& t : e.terms) t.c *= s;
  return q;
}

SystemSpec SystemSpec::with_potential(PotentialModel q) const {
  SystemSpec s = *this;
  s.potential = std::move(q);
  return s;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* ValidationReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::ostringstream s;
  for (const auto& c : checks)
    s << (c.passed ? "ok   " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": ") << c.detail
      << "\n";
  for (const auto& w : warnings) s << "warn " << w << "\n";
  return s.str();
}

int Sector::frame_sign() const {
  return permutation_sign(order);
}

namespace {

struct EigenData {
  CVector mu;
  CMatrix H;
};

EigenData sorted_eigen(const CMatrix& A) {
  Eigen::ComplexEigenSolver<CMatrix> solver(A);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver for A did not converge");
  const Eigen::Index n = A.rows();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  const CVector& ev = solver.eigenvalues();
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
    return ev[a].imag() < ev[b].imag();
  });
  EigenData d{CVector(n), CMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    d.mu[k] = ev[idx[static_cast<std::size_t>(k)]];
    CVector h = solver.eigenvectors().col(idx[static_cast<std::size_t>(k)]);
    // Fix the phase so the largest component is real positive; unit length.
    Eigen::Index big = 0;
    h.cwiseAbs().maxCoeff(&big);
    h *= std::abs(h[big]) / h[big];
    h /= h.norm();
    d.H.col(k) = h;
  }
  const cplx det = d.H.determinant();
  if (std::abs(det) < 1e-300) throw NumericalError("eigenvectors of A are degenerate");
  d.H.col(0) /= det;
  return d;
}

}  // namespace

std::vector<int> growth_order(const CVector& b, double theta) {
  const cplx w = std::polar(1.0, theta);
  std::vector<int> order(static_cast<std::size_t>(b.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int c) { return (b[a] * w).real() < (b[c] * w).real(); });
  return order;
}

SectorGeometry sector_geometry(const CVector& b) {
  const int n = static_cast<int>(b.size());
  if (n < 2) throw UsageError("sector_geometry: need at least two entries");
  struct Candidate {
    double angle;
    int j, k;
  };
  std::vector<Candidate> cand;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const cplx d = b[j] - b[k];
      if (std::abs(d) == 0.0) throw UsageError("sector_geometry: repeated entries");
      // Re(z d) = 0  <=>  arg z = pi/2 - arg d (mod pi)
      const double t = std::numbers::pi / 2 - std::arg(d);
      cand.push_back({wrap_angle(t), j, k});
      cand.push_back({wrap_angle(t + std::numbers::pi), j, k});
    }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& c) {
    return a.angle < c.angle;
  });

  SectorGeometry g;
  constexpr double kSame = 1e-9;
  for (const auto& c : cand) {
    const bool wraps = !g.rays.empty() && c.angle > kTwoPi - kSame && g.rays.front() < kSame;
    if (!g.rays.empty() && (c.angle - g.rays.back() < kSame || wraps)) {
      auto& pairs = wraps ? g.ray_pairs.front() : g.ray_pairs.back();
      pairs.emplace_back(c.j, c.k);
      g.degenerate = true;
      continue;
    }
    g.rays.push_back(c.angle);
    g.ray_pairs.push_back({{c.j, c.k}});
  }

  const int N = g.count();
  const double scale = b.cwiseAbs().maxCoeff();
  for (int s = 0; s < N; ++s) {
    Sector sec;
    sec.begin = (s == 0) ? g.rays[static_cast<std::size_t>(N - 1)] - kTwoPi
                         : g.rays[static_cast<std::size_t>(s - 1)];
    sec.end = g.rays[static_cast<std::size_t>(s)];
    sec.bisector = 0.5 * (sec.begin + sec.end);
    sec.order = growth_order(b, sec.bisector);
    sec.R.resize(n);
    sec.frame = CMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      sec.R[k] = b[sec.order[static_cast<std::size_t>(k)]];
      sec.frame(sec.order[static_cast<std::size_t>(k)], k) = 1.0;
    }
    const cplx w = std::polar(1.0, sec.bisector);
    sec.margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < n; ++k)
      sec.margin = std::min(sec.margin, ((sec.R[k + 1] - sec.R[k]) * w).real() / scale);
    g.sectors.push_back(std::move(sec));
  }
  return g;
}

int SectorGeometry::sector_of(double theta) const {
  const int N = count();
  const double lo = sectors.front().begin;
  double t = theta;
  while (t < lo) t += kTwoPi;
  while (t >= lo + kTwoPi) t -= kTwoPi;
  for (int s = 0; s < N; ++s) {
    const auto& sec = sectors[static_cast<std::size_t>(s)];
    if (std::abs(t - sec.begin) < 1e-12 || std::abs(t - sec.end) < 1e-12)
      throw UsageError("sector_of: direction lies on a separation ray");
    if (t > sec.begin && t < sec.end) return s;
  }
  throw UsageError("sector_of: direction not located");
}

ValidationReport validate(const SystemSpec& spec) {
  ValidationReport r;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    r.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const int n = spec.dimension();
  const bool shape_ok = n >= 2 && n <= 8 && spec.A.rows() == n && spec.A.cols() == n;
  add("dimension", shape_ok,
      "n = " + std::to_string(n) + ", A is " + std::to_string(spec.A.rows()) + "x" +
          std::to_string(spec.A.cols()));
  if (!shape_ok) return r;

  const double a_scale = std::max(1.0, spec.A.cwiseAbs().maxCoeff());
  {
    double worst = 0.0;
    int at = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(spec.A(i, i)) > worst) worst = std::abs(spec.A(i, i)), at = i;
    add("A-offdiagonal", worst <= 1e-14 * a_scale,
        worst > 0 ? "A(" + std::to_string(at + 1) + "," + std::to_string(at + 1) + ") = " + fmt(worst)
                  : "");
  }

  const EigenData eig = sorted_eigen(spec.A);
  std::ostringstream mus;
  for (int k = 0; k < n; ++k) mus << (k ? ", " : "") << fmt(eig.mu[k]);
  {
    bool ok = true;
    std::string witness;
    for (int j = 0; j < n && ok; ++j)
      for (int k = j + 1; k < n && ok; ++k) {
        const cplx gap = eig.mu[k] - eig.mu[j];
        const double dist = std::abs(gap - std::round(gap.real()));
        if (dist <= 1e-9) {
          ok = false;
          witness = "mu_" + std::to_string(k + 1) + " - mu_" + std::to_string(j + 1) + " = " +
                    fmt(gap) + " is an integer";
        }
      }
    add("mu-gap-nonintegral", ok, ok ? "mu = (" + mus.str() + ")" : witness);
  }
  {
    bool ok = true;
    std::string witness;
    for (int k = 0; k + 1 < n && ok; ++k)
      if (!(eig.mu[k + 1].real() - eig.mu[k].real() > 1e-9 * a_scale)) {
        ok = false;
        witness = "Re mu_" + std::to_string(k + 1) + " = Re mu_" + std::to_string(k + 2);
      }
    add("mu-real-part-ordered", ok, witness);
  }
  {
    bool ok = true;
    std::string witness;
    for (int k = 0; k < n && ok; ++k)
      if (std::abs(eig.mu[k].real()) <= 1e-12 * a_scale) {
        ok = false;
        witness = "Re mu_" + std::to_string(k + 1) + " = 0";
      } else if (std::abs(eig.mu[k].real()) < 1e-3 * a_scale) {
        r.warnings.push_back("Re mu_" + std::to_string(k + 1) + " = " + fmt(eig.mu[k].real()) +
                             " is small; matching at the origin is ill-conditioned");
      }
    add("mu-real-part-nonzero", ok, witness);
  }

  const double b_scale = spec.b.cwiseAbs().maxCoeff();
  {
    bool ok = b_scale > 0;
    std::string witness;
    for (int j = 0; j < n && ok; ++j)
      if (std::abs(spec.b[j]) <= 1e-14 * b_scale) ok = false, witness = "b_" + std::to_string(j + 1) + " = 0";
    add("b-nonzero", ok, witness);
  }
  {
    bool ok = true;
    std::string witness;
    for (int j = 0; j < n && ok; ++j)
      for (int k = j + 1; k < n && ok; ++k)
        if (std::abs(spec.b[j] - spec.b[k]) <= 1e-12 * b_scale)
          ok = false, witness = "b_" + std::to_string(j + 1) + " = b_" + std::to_string(k + 1);
    add("b-distinct", ok, witness);
  }
  {
    const cplx sum = spec.b.sum();
    add("b-sum-zero", std::abs(sum) <= 1e-12 * std::max(b_scale, 1e-300) * n, "sum = " + fmt(sum));
  }
  {
    bool ok = true;
    std::string witness;
    const double tol = 1e-12 * b_scale * b_scale * b_scale;
    for (int i = 0; i < n && ok; ++i)
      for (int j = i + 1; j < n && ok; ++j)
        for (int k = j + 1; k < n && ok; ++k) {
          const double cross = ((spec.b[j] - spec.b[i]) * std::conj(spec.b[k] - spec.b[i])).imag();
          if (std::abs(cross) <= tol)
            ok = false, witness = "b_" + std::to_string(i + 1) + ", b_" + std::to_string(j + 1) +
                                  ", b_" + std::to_string(k + 1) + " collinear";
        }
    add("b-noncollinear", ok, witness);
  }

  {
    bool off = true, expo = true, decay = true;
    std::string w_off, w_expo, w_decay;
    for (const auto& e : spec.potential.entries()) {
      const std::string at = "(" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + ")";
      if (e.i == e.j && !e.terms.empty()) off = false, w_off = "diagonal entry " + at;
      for (const auto& t : e.terms) {
        if (!(t.a >= 1.0)) expo = false, w_expo = "entry " + at + " has exponent " + fmt(t.a);
        if (!(t.sigma > 0.0)) decay = false, w_decay = "entry " + at + " has rate " + fmt(t.sigma);
      }
    }
    add("potential-offdiagonal", off, w_off);
    add("potential-exponent", expo, w_expo);
    add("potential-decay", decay, w_decay);
  }
  add("p-exponent", spec.p > 2.0, "p = " + fmt(spec.p));

  bool b_ok = true;
  for (const auto& c : r.checks)
    if (c.name.rfind("b-", 0) == 0 && !c.passed) b_ok = false;
  if (b_ok) {
    const SectorGeometry g = sector_geometry(spec.b);
    add("sector-geometry", !g.degenerate,
        std::to_string(g.count()) + " rays" + (g.degenerate ? ", two pairs share a ray" : ""));
  }
  return r;
}

ValidatedSystem require_valid(const SystemSpec& spec) {
  ValidationReport r = validate(spec);
  if (const Check* f = r.first_failure())
    throw AssumptionError("check '" + f->name + "' failed" + (f->detail.empty() ? "" : ": " + f->detail));
  const EigenData eig = sorted_eigen(spec.A);
  return ValidatedSystem{spec, eig.mu, eig.H, sector_geometry(spec.b), std::move(r)};
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw InputError("expected a complex number as [re, im], got " + j.dump());
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string("field '") + what + "' must be a number");
  return j.get<double>();
}

}  // namespace

SystemSpec spec_from_json(const json& j) {
  SystemSpec s;
  if (!j.is_object()) throw InputError("system file must hold a JSON object");
  s.name = j.value("name", std::string{});
  const json& b = field(j, "B");
  if (!b.is_array() || b.empty()) throw InputError("'B' must be a nonempty list of diagonal entries");
  const int n = static_cast<int>(b.size());
  if (n > 8) throw InputError("dimension above 8 is not supported");
  s.b.resize(n);
  for (int k = 0; k < n; ++k) s.b[k] = complex_from_json(b[static_cast<std::size_t>(k)]);

  const json& a = field(j, "A");
  if (!a.is_array() || static_cast<int>(a.size()) != n)
    throw InputError("'A' must have as many rows as 'B' has entries");
  s.A.resize(n, n);
  for (int r = 0; r < n; ++r) {
    const json& row = a[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) throw InputError("'A' must be square");
    for (int c = 0; c < n; ++c) s.A(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  if (j.contains("n") && number(j.at("n"), "n") != n) throw InputError("'n' disagrees with 'B'");
  if (j.contains("p")) s.p = number(j.at("p"), "p");

  std::vector<PotentialEntry> entries;
  if (j.contains("potential")) {
    const json& pot = j.at("potential");
    if (!pot.is_array()) throw InputError("'potential' must be a list");
    for (const json& e : pot) {
      PotentialEntry pe;
      pe.i = static_cast<int>(number(field(e, "i"), "i")) - 1;
      pe.j = static_cast<int>(number(field(e, "j"), "j")) - 1;
      if (pe.i < 0 || pe.j < 0 || pe.i >= n || pe.j >= n)
        throw InputError("potential index out of range 1..n");
      const json& terms = field(e, "terms");
      if (!terms.is_array()) throw InputError("'terms' must be a list");
      for (const json& t : terms)
        pe.terms.push_back({complex_from_json(field(t, "c")), number(field(t, "a"), "a"),
                            number(field(t, "sigma"), "sigma")});
      entries.push_back(std::move(pe));
    }
  }
  s.potential = PotentialModel(n, std::move(entries));
  return s;
}

json spec_to_json(const SystemSpec& s) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["n"] = s.dimension();
  j["A"] = matrix_to_json(s.A);
  json b = json::array();
  for (Eigen::Index k = 0; k < s.b.size(); ++k) b.push_back(complex_to_json(s.b[k]));
  j["B"] = b;
  j["p"] = s.p;
  json pot = json::array();
  for (const auto& e : s.potential.entries()) {
    json terms = json::array();
    for (const auto& t : e.terms) terms.push_back({{"c", complex_to_json(t.c)}, {"a", t.a}, {"sigma", t.sigma}});
    pot.push_back({{"i", e.i + 1}, {"j", e.j + 1}, {"terms", terms}});
  }
  j["potential"] = pot;
  return j;
}

SystemSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open system file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
  try {
    return spec_from_json(j);
  } catch (const json::exception& e) {
    throw InputError("bad system file " + path.string() + ": " + e.what());
  }
}

}  // namespace weylrec
