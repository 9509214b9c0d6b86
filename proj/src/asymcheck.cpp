#include "weylrec/asymcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace weylrec {

CMatrix qhat_o(const CMatrix& q, const CVector& b) {
  const Eigen::Index n = b.size();
  if (q.rows() != n || q.cols() != n) throw UsageError("qhat_o: q and B dimensions differ");
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) out(i, j) = -q(i, j) / (b[i] - b[j]);
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// || c t^a e^{-sigma t} ||_1 and ||.||_p on (0, inf).
double term_l1(cplx c, double a, double sigma) {
  return std::abs(c) * std::tgamma(a + 1.0) / std::pow(sigma, a + 1.0);
}

double term_lp(cplx c, double a, double sigma, double p) {
  return std::abs(c) * std::pow(std::tgamma(p * a + 1.0) / std::pow(p * sigma, p * a + 1.0), 1.0 / p);
}

}  // namespace

QHat::QHat(const ValidatedSystem& system, double tol) : system_(system), tol_(tol), weight_(0.0) {
  if (!(tol > 0.0)) throw UsageError("QHat: tolerance must be positive");
  const CMatrix& A = system.spec.A;
  const CVector& b = system.spec.b;
  for (Eigen::Index i = 0; i < b.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      if (i != j) weight_ = std::max(weight_, 2.0 * std::abs(A(j, i)) / std::abs(b[i] - b[j]));
}

CMatrix QHat::offdiagonal(double x) const {
  return qhat_o(system_.spec.potential.evaluate(x), system_.spec.b);
}

CMatrix QHat::offdiagonal_derivative(double x) const {
  return qhat_o(system_.spec.potential.derivative(x), system_.spec.b);
}

cplx QHat::commutator_diag(int k, double t) const {
  const CMatrix h = offdiagonal(t);
  const CMatrix& A = system_.spec.A;
  return (h.row(k) * A.col(k)).value() - (A.row(k) * h.col(k)).value();
}

double QHat::tail(double X) const {
  if (system_.spec.potential.empty()) return 0.0;
  return weight_ * system_.spec.potential.tail_bound(X) / X;
}

std::pair<cplx, double> QHat::integrate_d(int k, double x) const {
  if (system_.spec.potential.empty()) return {0.0, 0.0};
  double X = std::max({2.0 * x, 1.0, system_.spec.potential.cutoff(0.1 * tol_)});
  while (tail(X) > 0.5 * tol_) X *= 1.5;
  if (x >= X) return {0.0, tail(x)};
  const QuadResult r =
      quad_adaptive([&](double t) { return commutator_diag(k, t) / t; }, x, X, 0.5 * tol_);
  return {r.value, r.error + tail(X)};
}

CMatrix QHat::d(double x) const {
  if (x < 0.0) throw UsageError("d(x) needs x >= 0");
  const int n = system_.dimension();
  CMatrix out = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) out(k, k) = integrate_d(k, x).first;
  return out;
}

double QHat::d_error(double x) const {
  double e = 0.0;
  for (int k = 0; k < system_.dimension(); ++k) e = std::max(e, integrate_d(k, x).second);
  return e;
}

CMatrix QHat::value(double x) const { return offdiagonal(x) + d(x); }

CMatrix QHat::derivative(double x) const {
  CMatrix out = offdiagonal_derivative(x);
  for (int k = 0; k < system_.dimension(); ++k) out(k, k) = -commutator_diag(k, x) / x;
  return out;
}

CMatrix QHat::tilde(double x) const {
  if (!(x > 0.0)) throw UsageError("qtilde needs x > 0");
  const CMatrix h = value(x);
  const CMatrix& A = system_.spec.A;
  return derivative(x) + (h * A - A * h) / x;
}

bool QHat::tilde_integrable() const {
  for (const Membership& m : membership())
    if (m.function == "qtilde" && !m.member) return false;
  return true;
}

std::vector<Membership> QHat::membership() const {
  const int n = system_.dimension();
  const double p = system_.spec.p;
  const auto& entries = system_.spec.potential.entries();
  std::vector<Membership> out;

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Membership mq{"q", i, j, true, 0.0, 0.0, "c x^a e^{-sigma x} terms with a >= 1, sigma > 0"};
      Membership md{"q'", i, j, true, 0.0, 0.0, "derivative terms have exponents a-1 >= 0 and a"};
      for (const auto& e : entries) {
        if (e.i != i || e.j != j) continue;
        for (const auto& t : e.terms) {
          if (t.a < 1.0 || !(t.sigma > 0.0)) {
            mq.member = md.member = false;
            mq.reason = md.reason = "term outside the family (a < 1 or sigma <= 0)";
            continue;
          }
          mq.l1 += term_l1(t.c, t.a, t.sigma);
          mq.lp += term_lp(t.c, t.a, t.sigma, p);
          md.l1 += term_l1(t.c * t.a, t.a - 1.0, t.sigma) + term_l1(t.c * t.sigma, t.a, t.sigma);
          md.lp += term_lp(t.c * t.a, t.a - 1.0, t.sigma, p) + term_lp(t.c * t.sigma, t.a, t.sigma, p);
        }
      }
      if (!mq.member) mq.l1 = mq.lp = md.l1 = md.lp = kInf;
      out.push_back(mq);
      out.push_back(md);
    }

  // qtilde: the diagonal of x^-1 [qhat_o, A] cancels against d', and the
  // off-diagonal family parts keep exponents >= 0. The only possible obstruction
  // is x^-1 (d_i - d_j) A_ij, which tends to x^-1 (d_i(0) - d_j(0)) A_ij at 0.
  const CMatrix d0 = d(0.0);
  const CMatrix& A = system_.spec.A;
  double scale = 0.0;
  for (int k = 0; k < n; ++k) scale = std::max(scale, std::abs(d0(k, k)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Membership m{"qtilde", i, j, true, 0.0, 0.0, ""};
      const cplx c = (d0(i, i) - d0(j, j)) * A(i, j);
      if (std::abs(c) > 1e-12 * std::max(scale, 1e-300) && std::abs(c) > 1e-14) {
        m.member = false;
        m.l1 = m.lp = kInf;
        m.reason = "behaves like c/x at 0 with c = (d_i(0) - d_j(0)) A_ij = " +
                   std::to_string(c.real()) + (c.imag() < 0 ? "" : "+") + std::to_string(c.imag()) + "i";
      } else if (system_.spec.potential.empty()) {
        m.reason = "identically zero";
      } else {
        const double X = std::max(1.0, system_.spec.potential.cutoff(1e-12));
        m.l1 = quad_adaptive([&](double t) { return cplx(std::abs(tilde(t)(i, j))); }, 0.0, X, 1e-9).value.real();
        m.lp = std::pow(quad_adaptive([&](double t) { return cplx(std::pow(std::abs(tilde(t)(i, j)), p)); },
                                      0.0, X, 1e-12).value.real(), 1.0 / p);
        m.reason = "bounded at 0, exponential decay; norms by quadrature";
      }
      out.push_back(m);
    }
  return out;
}

CMatrix d_matrix(const ValidatedSystem& system, double x, double tol) { return QHat(system, tol).d(x); }

// ---------------------------------------------------------------------------

CMatrix first_order_matrix(const CMatrix& psi, const CMatrix& psi0, cplx rho, const CMatrix& qhat,
                        const CMatrix& frame) {
  return rho * (psi - psi0) - qhat * frame;
}

double offdiagonal_norm(const CMatrix& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) s += std::abs(m(i, j));
  return s;
}

double diagonal_norm(const CMatrix& m) { return m.diagonal().cwiseAbs().sum(); }

bool FirstOrderReport::passed() const {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!decreasing[i] || !small[i]) return false;
  return true;
}

FirstOrderReport first_order_residual(const ValidatedSystem& system, const FirstOrderConfig& c) {
  if (c.x.empty() || c.radii.empty()) throw UsageError("first_order_residual: empty grid or schedule");
  for (std::size_t i = 1; i < c.radii.size(); ++i)
    if (!(c.radii[i] > c.radii[i - 1])) throw UsageError("|rho| schedule must increase");

  FirstOrderReport rep;
  rep.theta = c.theta;
  rep.sector = system.geometry.sector_of(c.theta);  // throws on a separation ray
  rep.x = c.x;
  rep.radii = c.radii;
  rep.threshold = c.threshold;
  const Sector& sec = system.geometry.sectors[static_cast<std::size_t>(rep.sector)];
  const CMatrix frame_inv = sec.frame.transpose();

  const QHat qh(system);
  std::vector<CMatrix> qhat;
  for (double x : c.x) {
    qhat.push_back(qh.value(x));
    rep.qhat_norm.push_back(qhat.back().cwiseAbs().sum());
  }

  const std::size_t nr = c.radii.size(), nx = c.x.size();
  rep.residual.assign(nr, std::vector<double>(nx));
  rep.diagonal.assign(nr, std::vector<double>(nx));
  rep.p_residual.assign(nr, std::vector<double>(nx));
  std::vector<SpectralMap> maps(nr);
  for_each_index(
      nr, c.execution,
      [&](std::size_t k) {
        maps[k] = spectral_map(system, std::polar(c.radii[k], c.theta), rep.sector, c.x, c.spectral);
      },
      c.threads);

  const int n = system.dimension();
  for (std::size_t k = 0; k < nr; ++k)
    for (std::size_t i = 0; i < nx; ++i) {
      const SpectralMap& m = maps[k];
      const CMatrix D = frame_inv * first_order_matrix(m.psi[i], m.psi0[i], m.rho, qhat[i], sec.frame);
      rep.residual[k][i] = offdiagonal_norm(D);
      rep.diagonal[k][i] = diagonal_norm(D);
      rep.p_residual[k][i] = offdiagonal_norm(m.rho * (m.P[i] - CMatrix::Identity(n, n)) - qhat[i]);
    }

  for (std::size_t i = 0; i < nx; ++i) {
    bool dec = true;
    for (std::size_t k = 1; k < nr; ++k) dec = dec && rep.residual[k][i] < rep.residual[k - 1][i];
    rep.decreasing.push_back(dec);
    rep.small.push_back(rep.residual[nr - 1][i] <= c.threshold * rep.qhat_norm[i]);
  }
  return rep;
}

void write_residual_csv(std::ostream& out, const FirstOrderReport& r) {
  out.precision(12);
  out << "x,rho_abs,residual,diagonal,p_residual,threshold\n";
  for (std::size_t i = 0; i < r.x.size(); ++i)
    for (std::size_t k = 0; k < r.radii.size(); ++k)
      out << r.x[i] << ',' << r.radii[k] << ',' << r.residual[k][i] << ',' << r.diagonal[k][i] << ','
          << r.p_residual[k][i] << ',' << r.threshold * r.qhat_norm[i] << '\n';
}

nlohmann::json first_order_summary(const FirstOrderReport& r) {
  nlohmann::json j;
  j["theta"] = r.theta;
  j["sector"] = r.sector;
  j["radii"] = r.radii;
  j["passed"] = r.passed();
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    std::vector<double> res;
    for (std::size_t k = 0; k < r.radii.size(); ++k) res.push_back(r.residual[k][i]);
    pts.push_back({{"x", r.x[i]},
                   {"residual", res},
                   {"qhat_norm", r.qhat_norm[i]},
                   {"decreasing", static_cast<bool>(r.decreasing[i])},
                   {"below_threshold", static_cast<bool>(r.small[i])}});
  }
  j["points"] = pts;
  return j;
}

}  // namespace weylrec
