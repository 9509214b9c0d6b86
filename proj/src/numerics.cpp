#include "weylrec/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace weylrec {

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw UsageError("integrator tolerances must be positive");
  if (!(min_step > 0.0) || !(min_step < max_step))
    throw UsageError("integrator requires 0 < min_step < max_step");
  if (max_steps <= 0) throw UsageError("integrator max_steps must be positive");
}

namespace {

// Dormand-Prince 8(5,3), coefficients from Hairer & Wanner's DOP853.
namespace dop {
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;

constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;
}  // namespace dop

class LinearStepper {
 public:
  LinearStepper(const PathODEProblem& p, Eigen::Index dim)
      : problem_(p), dz_(p.end - p.start), M_(dim, dim) {
    for (auto& k : k_) k.resize(dim);
    tmp_.resize(dim);
  }

  void rhs(double s, const CVector& y, CVector& out) {
    problem_.coefficient(problem_.start + s * dz_, M_);
    out.noalias() = M_ * y;
    out *= dz_;
  }

  // One DOP853 attempt; returns the scaled error norm, fills y_new.
  double attempt(double s, double h, const CVector& y, const CVector& f0, CVector& y_new,
                 const IntegratorConfig& cfg) {
    using namespace dop;
    auto& k1 = k_[0];
    k1 = f0;
    tmp_ = y + h * a21 * k1;
    rhs(s + c2 * h, tmp_, k_[1]);
    tmp_ = y + h * (a31 * k1 + a32 * k_[1]);
    rhs(s + c3 * h, tmp_, k_[2]);
    tmp_ = y + h * (a41 * k1 + a43 * k_[2]);
    rhs(s + c4 * h, tmp_, k_[3]);
    tmp_ = y + h * (a51 * k1 + a53 * k_[2] + a54 * k_[3]);
    rhs(s + c5 * h, tmp_, k_[4]);
    tmp_ = y + h * (a61 * k1 + a64 * k_[3] + a65 * k_[4]);
    rhs(s + c6 * h, tmp_, k_[5]);
    tmp_ = y + h * (a71 * k1 + a74 * k_[3] + a75 * k_[4] + a76 * k_[5]);
    rhs(s + c7 * h, tmp_, k_[6]);
    tmp_ = y + h * (a81 * k1 + a84 * k_[3] + a85 * k_[4] + a86 * k_[5] + a87 * k_[6]);
    rhs(s + c8 * h, tmp_, k_[7]);
    tmp_ = y + h * (a91 * k1 + a94 * k_[3] + a95 * k_[4] + a96 * k_[5] + a97 * k_[6] +
                    a98 * k_[7]);
    rhs(s + c9 * h, tmp_, k_[8]);
    tmp_ = y + h * (a101 * k1 + a104 * k_[3] + a105 * k_[4] + a106 * k_[5] + a107 * k_[6] +
                    a108 * k_[7] + a109 * k_[8]);
    rhs(s + c10 * h, tmp_, k_[9]);
    tmp_ = y + h * (a111 * k1 + a114 * k_[3] + a115 * k_[4] + a116 * k_[5] + a117 * k_[6] +
                    a118 * k_[7] + a119 * k_[8] + a1110 * k_[9]);
    rhs(s + c11 * h, tmp_, k_[10]);
    tmp_ = y + h * (a121 * k1 + a124 * k_[3] + a125 * k_[4] + a126 * k_[5] + a127 * k_[6] +
                    a128 * k_[7] + a129 * k_[8] + a1210 * k_[9] + a1211 * k_[10]);
    rhs(s + h, tmp_, k_[11]);

    // Weighted increment reuses tmp_.
    tmp_ = b1 * k1 + b6 * k_[5] + b7 * k_[6] + b8 * k_[7] + b9 * k_[8] + b10 * k_[9] +
           b11 * k_[10] + b12 * k_[11];
    y_new = y + h * tmp_;

    double err = 0.0;
    double err2 = 0.0;
    const Eigen::Index n = y.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sk = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const cplx e3 = tmp_[i] - bhh1 * k1[i] - bhh2 * k_[8][i] - bhh3 * k_[11][i];
      const cplx e5 = er1 * k1[i] + er6 * k_[5][i] + er7 * k_[6][i] + er8 * k_[7][i] +
                      er9 * k_[8][i] + er10 * k_[9][i] + er11 * k_[10][i] + er12 * k_[11][i];
      err2 += std::norm(e3 / sk);
      err += std::norm(e5 / sk);
    }
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    return std::abs(h) * err * std::sqrt(1.0 / (static_cast<double>(n) * deno));
  }

  cplx point(double s) const { return problem_.start + s * dz_; }

 private:
  const PathODEProblem& problem_;
  cplx dz_;
  CMatrix M_;
  std::array<CVector, 12> k_;
  CVector tmp_;
};

PathSolution integrate_once(const PathODEProblem& problem, const std::vector<double>& fractions,
                            const IntegratorConfig& cfg) {
  PathSolution out;
  const Eigen::Index dim = problem.initial.size();
  out.values.reserve(fractions.size());
  if (problem.end == problem.start) {
    out.values.assign(fractions.size(), problem.initial);
    return out;
  }
  LinearStepper stepper(problem, dim);
  CVector y = problem.initial;
  CVector f0(dim), y_new(dim);
  double s = 0.0;
  std::size_t next = 0;
  while (next < fractions.size() && fractions[next] <= 0.0) {
    out.values.push_back(y);
    ++next;
  }
  if (next == fractions.size()) return out;

  stepper.rhs(s, y, f0);
  // Initial step from the ratio of solution to derivative magnitudes.
  double d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
    d0 += std::norm(y[i] / sk);
    d1 += std::norm(f0[i] / sk);
  }
  d0 = std::sqrt(d0 / static_cast<double>(dim));
  d1 = std::sqrt(d1 / static_cast<double>(dim));
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h = std::clamp(h, cfg.min_step, cfg.max_step);

  const double target_end = fractions.back();
  bool last_rejected = false;
  while (next < fractions.size()) {
    if (out.steps + out.rejected >= static_cast<std::size_t>(cfg.max_steps)) {
      std::ostringstream msg;
      msg << "integrator exceeded " << cfg.max_steps << " steps near z = " << stepper.point(s);
      throw NumericalError(msg.str());
    }
    const double target = fractions[next];
    bool hits = false;
    double step = h;
    if (s + step >= target - 1e-14 * std::max(1.0, target)) {
      step = target - s;
      hits = true;
    }
    const double err = stepper.attempt(s, step, y, f0, y_new, cfg);
    if (err <= 1.0) {
      const double fac11 = std::pow(err, 0.125);
      double fac = std::clamp(fac11 / 0.9, 1.0 / 6.0, 3.0);
      double h_new = step / fac;
      if (last_rejected) h_new = std::min(h_new, step);
      s = hits ? target : s + step;
      y = y_new;
      ++out.steps;
      last_rejected = false;
      while (hits && next < fractions.size() && fractions[next] <= s) {
        out.values.push_back(y);
        ++next;
      }
      if (next == fractions.size() || s >= target_end) break;
      stepper.rhs(s, y, f0);
      // Keep the pre-clipping step when the clip was much shorter than h.
      h = std::clamp(hits ? std::max(h_new, h) : h_new, cfg.min_step, cfg.max_step);
    } else {
      const double fac11 = std::pow(err, 0.125);
      h = step / std::min(3.0, fac11 / 0.9);
      ++out.rejected;
      last_rejected = true;
      if (h < cfg.min_step) {
        std::ostringstream msg;
        msg << "integrator step underflow (h = " << h << ") near z = " << stepper.point(s);
        throw NumericalError(msg.str());
      }
    }
  }
  while (out.values.size() < fractions.size()) out.values.push_back(y);
  return out;
}

}  // namespace

PathSolution integrate_linear(const PathODEProblem& problem, std::span<const cplx> nodes,
                              const IntegratorConfig& config, bool estimate_global_error) {
  config.validate();
  if (!problem.coefficient) throw UsageError("integrate_linear: missing coefficient");
  const cplx dz = problem.end - problem.start;
  std::vector<double> fractions;
  fractions.reserve(nodes.size());
  for (const cplx& z : nodes) {
    double s = 0.0;
    if (std::abs(dz) > 0.0) {
      const cplx t = (z - problem.start) / dz;
      if (std::abs(t.imag()) > 1e-9 || t.real() < -1e-12 || t.real() > 1.0 + 1e-12)
        throw UsageError("integrate_linear: node off the integration segment");
      s = std::clamp(t.real(), 0.0, 1.0);
    }
    if (!fractions.empty() && s < fractions.back())
      throw UsageError("integrate_linear: nodes must be ordered from start to end");
    fractions.push_back(s);
  }
  PathSolution sol = integrate_once(problem, fractions, config);
  if (estimate_global_error) {
    IntegratorConfig tight = config;
    tight.rtol /= 64.0;
    tight.atol /= 64.0;
    const PathSolution ref = integrate_once(problem, fractions, tight);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.values.size(); ++i)
      worst = std::max(worst, (sol.values[i] - ref.values[i]).cwiseAbs().maxCoeff());
    sol.global_error = worst;
  }
  return sol;
}

PathSolution integrate_linear_real(double a, double b,
                                   const std::function<void(double x, CMatrix& out)>& coefficient,
                                   const CVector& initial, std::span<const double> nodes,
                                   const IntegratorConfig& config) {
  PathODEProblem p;
  p.start = a;
  p.end = b;
  p.coefficient = [&coefficient](cplx z, CMatrix& out) { coefficient(z.real(), out); };
  p.initial = initial;
  std::vector<cplx> zs(nodes.begin(), nodes.end());
  return integrate_linear(p, zs, config);
}

// ---------------------------------------------------------------------------

namespace {

// Legendre P_l(y) for l = 0..L into out.
void legendre_values(double y, int L, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(L) + 1, 0.0);
  out[0] = 1.0;
  if (L >= 1) out[1] = y;
  for (int l = 1; l < L; ++l)
    out[l + 1] = ((2.0 * l + 1.0) * y * out[l] - l * out[l - 1]) / (l + 1.0);
}

GaussRule build_gauss(int m) {
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    double y = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = y;
      for (int l = 1; l < m; ++l) {
        const double p2 = ((2.0 * l + 1.0) * y * p1 - l * p0) / (l + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = m * (y * p1 - p0) / (y * y - 1.0);
      const double dy = p1 / dp;
      y -= dy;
      if (std::abs(dy) < 1e-16) break;
    }
    rule.nodes[m - 1 - i] = y;
    rule.weights[m - 1 - i] = 2.0 / ((1.0 - y * y) * dp * dp);
  }
  return rule;
}

constexpr int kMaxGauss = 64;

}  // namespace

const GaussRule& gauss_legendre(int m) {
  if (m < 1 || m > kMaxGauss) throw UsageError("gauss_legendre: order out of range");
  static std::array<GaussRule, kMaxGauss + 1> rules;
  static std::array<std::once_flag, kMaxGauss + 1> flags;
  std::call_once(flags[m], [m] { rules[m] = build_gauss(m); });
  return rules[m];
}

namespace {

cplx gl_apply(const std::function<cplx(double)>& f, double a, double b) {
  const GaussRule& g = gauss_legendre(10);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) sum += g.weights[i] * f(mid + half * g.nodes[i]);
  return half * sum;
}

void quad_recurse(const std::function<cplx(double)>& f, double a, double b, cplx coarse,
                  double tol, int depth, int max_depth, QuadResult& acc) {
  const double m = 0.5 * (a + b);
  const cplx left = gl_apply(f, a, m);
  const cplx right = gl_apply(f, m, b);
  const cplx refined = left + right;
  const double diff = std::abs(refined - coarse);
  if (diff <= tol || diff <= 1e-15 * std::abs(refined)) {
    acc.value += refined;
    acc.error += diff;
    acc.intervals += 2;
    return;
  }
  if (depth >= max_depth) {
    std::ostringstream msg;
    msg << "quad_adaptive: max depth " << max_depth << " exceeded on [" << a << ", " << b << "]";
    throw NumericalError(msg.str());
  }
  quad_recurse(f, a, m, left, 0.5 * tol, depth + 1, max_depth, acc);
  quad_recurse(f, m, b, right, 0.5 * tol, depth + 1, max_depth, acc);
}

}  // namespace

QuadResult quad_adaptive(const std::function<cplx(double)>& f, double a, double b, double tol,
                         int max_depth) {
  if (!(tol > 0.0)) throw UsageError("quad_adaptive: tolerance must be positive");
  QuadResult acc{0.0, 0.0, 0};
  if (a == b) return acc;
  quad_recurse(f, a, b, gl_apply(f, a, b), tol, 0, max_depth, acc);
  return acc;
}

// ---------------------------------------------------------------------------

PanelSamples::PanelSamples(std::vector<double> edges, int nodes_per_panel, Eigen::Index dim)
    : edges_(std::move(edges)), m_(nodes_per_panel), dim_(dim) {
  if (edges_.size() < 2) throw UsageError("PanelSamples: need at least one panel");
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (!(edges_[i] > edges_[i - 1])) throw UsageError("PanelSamples: edges must increase");
  const GaussRule& g = gauss_legendre(m_);
  for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
    const double mid = 0.5 * (edges_[p] + edges_[p + 1]);
    const double half = 0.5 * (edges_[p + 1] - edges_[p]);
    for (double y : g.nodes) abscissae_.push_back(mid + half * y);
  }
  values_.assign(abscissae_.size(), CVector::Zero(dim_));
}

void PanelSamples::finalize() {
  const GaussRule& g = gauss_legendre(m_);
  const std::size_t panels = edges_.size() - 1;
  legendre_.assign(panels, {});
  prefix_.assign(panels + 1, CVector::Zero(dim_));
  std::vector<double> P;
  for (std::size_t p = 0; p < panels; ++p) {
    auto& coeffs = legendre_[p];
    coeffs.assign(static_cast<std::size_t>(m_), CVector::Zero(dim_));
    for (int i = 0; i < m_; ++i) {
      legendre_values(g.nodes[i], m_ - 1, P);
      const CVector& v = values_[p * m_ + i];
      for (int l = 0; l < m_; ++l) coeffs[l] += (g.weights[i] * P[l]) * v;
    }
    for (int l = 0; l < m_; ++l) coeffs[l] *= (2.0 * l + 1.0) / 2.0;
    const double half = 0.5 * (edges_[p + 1] - edges_[p]);
    prefix_[p + 1] = prefix_[p] + (2.0 * half) * coeffs[0];
  }
}

CVector PanelSamples::cumulative(double s) const {
  if (legendre_.empty()) throw UsageError("PanelSamples: finalize() not called");
  if (s <= edges_.front()) return CVector::Zero(dim_);
  if (s >= edges_.back()) return prefix_.back();
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), s);
  const std::size_t p = static_cast<std::size_t>(it - edges_.begin()) - 1;
  const double mid = 0.5 * (edges_[p] + edges_[p + 1]);
  const double half = 0.5 * (edges_[p + 1] - edges_[p]);
  const double y = (s - mid) / half;
  std::vector<double> P;
  legendre_values(y, m_, P);
  const auto& coeffs = legendre_[p];
  CVector acc = (y + 1.0) * coeffs[0];
  for (int l = 1; l < m_; ++l) acc += ((P[l + 1] - P[l - 1]) / (2.0 * l + 1.0)) * coeffs[l];
  return prefix_[p] + half * acc;
}

CVector PanelSamples::total() const {
  if (prefix_.empty()) throw UsageError("PanelSamples: finalize() not called");
  return prefix_.back();
}

std::vector<double> panel_edges(double inner, double knee, double outer, double ratio,
                                double width, std::span<const double> breakpoints) {
  if (!(inner > 0.0) || !(knee >= inner) || !(outer > knee) || !(ratio > 1.0) || !(width > 0.0))
    throw UsageError("panel_edges: invalid layout");
  std::vector<double> e;
  for (double t = inner; t < knee * (1.0 - 1e-12); t *= ratio) e.push_back(t);
  for (double t = knee; t < outer - 1e-12 * outer; t += width) e.push_back(t);
  e.push_back(outer);
  for (double b : breakpoints)
    if (b > inner && b < outer) e.push_back(b);
  std::sort(e.begin(), e.end());
  std::vector<double> out;
  for (double t : e)
    if (out.empty() || t - out.back() > 1e-9 * std::max(1.0, t)) out.push_back(t);
  // Snap requested breakpoints exactly (dedup may have kept a nearby layout edge).
  for (double b : breakpoints) {
    if (!(b > inner && b < outer)) continue;
    auto it = std::min_element(out.begin(), out.end(),
                               [b](double x, double y) { return std::abs(x - b) < std::abs(y - b); });
    *it = b;
  }
  return out;
}

// ---------------------------------------------------------------------------

ExtrapolationResult extrapolate(std::span<const double> radii, std::span<const CVector> partials,
                                ExtrapolationMode mode, int order) {
  if (radii.size() != partials.size() || radii.size() < 3)
    throw UsageError("extrapolate: need at least three (radius, partial) pairs");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw UsageError("extrapolate: radii must increase");
  ExtrapolationResult res;
  for (std::size_t i = 1; i < partials.size(); ++i)
    res.increments.push_back((partials[i] - partials[i - 1]).cwiseAbs().maxCoeff());
  const std::size_t m = res.increments.size();
  const double scale = partials.back().cwiseAbs().maxCoeff();
  res.oscillation_decreasing =
      res.increments[m - 1] <= res.increments[m - 2] * (1.0 + 1e-12) ||
      res.increments[m - 1] <= 1e-14 * std::max(1.0, scale);

  if (mode == ExtrapolationMode::Averaging) {
    const double hi = radii.back();
    const double lo = hi - 0.5 * (hi - radii.front());
    CVector acc = CVector::Zero(partials.back().size());
    for (std::size_t i = 1; i < radii.size(); ++i) {
      const double a = std::max(radii[i - 1], lo);
      const double b = radii[i];
      if (b <= a) continue;
      const double span = radii[i] - radii[i - 1];
      const CVector va = partials[i - 1] + ((a - radii[i - 1]) / span) * (partials[i] - partials[i - 1]);
      acc += (0.5 * (b - a)) * (va + partials[i]);
    }
    res.estimate = acc / (hi - lo);
    return res;
  }

  if (order <= 1) {
    const std::size_t k = radii.size() - 1;
    const double r1 = radii[k - 1], r2 = radii[k];
    res.estimate = (r2 * partials[k] - r1 * partials[k - 1]) / (r2 - r1);
  } else {
    const std::size_t k = radii.size() - 3;
    Eigen::Matrix3d V;
    for (int i = 0; i < 3; ++i) {
      const double r = radii[k + i];
      V(i, 0) = 1.0;
      V(i, 1) = 1.0 / r;
      V(i, 2) = 1.0 / (r * r);
    }
    const Eigen::Vector3d e0 = V.transpose().fullPivLu().solve(Eigen::Vector3d(1.0, 0.0, 0.0));
    res.estimate = e0(0) * partials[k] + e0(1) * partials[k + 1] + e0(2) * partials[k + 2];
  }
  return res;
}

}  // namespace weylrec
