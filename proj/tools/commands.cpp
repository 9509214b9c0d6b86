#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "weylrec/asymcheck.hpp"
#include "weylrec/reconstruct.hpp"
#include "weylrec/unperturbed.hpp"

namespace weylrec::cli {

namespace fs = std::filesystem;

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("WEYLREC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 0;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InputError("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw InputError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty list");
  return out;
}

namespace {

struct Common {
  std::string spec;
  std::string out;  // empty: current directory (validate then writes nothing)
  int threads = 0;
  bool serial = false;

  Execution execution() const { return serial ? Execution::Serial : Execution::Parallel; }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--spec", c.spec, "System description (JSON)")->required();
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--threads", c.threads, "Worker threads (default: WEYLREC_THREADS or OpenMP default)");
  cmd->add_flag("--serial", c.serial, "Run the serial reference kernels");
}

std::ofstream open_output(const Common& c, const std::string& name) {
  std::error_code ec;
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path path = dir / name;
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  return f;
}

std::vector<double> increasing(const std::string& text, const char* what) {
  std::vector<double> v = parse_list(text);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw InputError(std::string(what) + " entries must be positive");
    if (i > 0 && !(v[i] > v[i - 1])) throw InputError(std::string(what) + " must increase");
  }
  return v;
}

std::string fmt(cplx z) {
  std::ostringstream s;
  s.precision(6);
  s << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return s.str();
}

int cmd_validate(const Common& c, std::ostream& out) {
  const SystemSpec spec = load_spec(c.spec);
  const ValidationReport report = validate(spec);
  out << "system " << (spec.name.empty() ? "(unnamed)" : spec.name) << ", n = " << spec.dimension() << "\n";
  out << report.summary();
  nlohmann::json j;
  j["name"] = spec.name;
  j["passed"] = report.passed();
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& ch : report.checks)
    checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  j["checks"] = checks;
  j["warnings"] = report.warnings;
  if (!report.passed()) {
    if (!c.out.empty()) open_output(c, "validate.json") << j.dump(2) << '\n';
    return kAssumption;
  }

  const ValidatedSystem sys = require_valid(spec);
  out << "mu:";
  nlohmann::json mu = nlohmann::json::array();
  for (Eigen::Index k = 0; k < sys.mu.size(); ++k) {
    out << "  " << fmt(sys.mu[k]);
    mu.push_back(complex_to_json(sys.mu[k]));
  }
  out << "\n" << sys.geometry.count() << " sectors\n";
  j["mu"] = mu;

  bool nondegenerate = true;
  nlohmann::json sectors = nlohmann::json::array();
  for (int s = 0; s < sys.geometry.count(); ++s) {
    const Sector& sec = sys.geometry.sectors[static_cast<std::size_t>(s)];
    const NondegeneracyReport c1 = check_nondegeneracy(sys, s);
    nondegenerate = nondegenerate && c1.passed;
    out << "  sector " << s << "  (" << sec.begin << ", " << sec.end << ")  order";
    for (int k : sec.order) out << ' ' << k + 1;
    out << "  min|Delta0| = " << c1.min_abs << (c1.passed ? "" : "  FAILED") << "\n";
    nlohmann::json d = nlohmann::json::array();
    for (cplx z : c1.delta) d.push_back(complex_to_json(z));
    std::vector<int> order;
    for (int k : sec.order) order.push_back(k + 1);
    sectors.push_back({{"begin", sec.begin},
                       {"end", sec.end},
                       {"order", order},
                       {"delta0", d},
                       {"drift", c1.drift},
                       {"min_abs_delta0", c1.min_abs},
                       {"nondegenerate", c1.passed}});
  }
  j["sectors"] = sectors;
  j["nondegenerate"] = nondegenerate;
  j["passed"] = nondegenerate;
  if (!c.out.empty()) open_output(c, "validate.json") << j.dump(2) << '\n';
  if (!nondegenerate) {
    out << "nondegeneracy fails: some Delta0_k vanishes\n";
    return kAssumption;
  }
  return kPass;
}

int cmd_forward(const Common& c, const std::string& xs, double rho_max, int rho_count, std::ostream& out) {
  const std::vector<double> x = increasing(xs, "x-grid");
  if (!(rho_max > 0.0) || rho_count < 1) throw InputError("need --rho-max > 0 and --rho-count >= 1");
  const ValidatedSystem sys = require_valid(load_spec(c.spec));
  std::vector<double> t;
  for (int j = 1; j <= rho_count; ++j) t.push_back(rho_max * j / rho_count);

  const SpectralConfig cfg;
  std::ofstream store = open_output(c, "samples.jsonl");
  std::ofstream deltas = open_output(c, "deltas.csv");
  deltas.precision(12);
  deltas << "ray,rho_abs,min_delta,p_hat_norm\n";
  double min_delta = std::numeric_limits<double>::infinity(), max_jump = 0.0;
  for (int ray = 0; ray < sys.geometry.count(); ++ray) {
    const auto samples = sample_ray(sys, ray, t, x, cfg, c.execution(), resolve_threads(c.threads));
    for (const BoundarySample& s : samples) {
      write_jsonl(store, s);
      double jump = 0.0;
      for (const CMatrix& m : s.P_hat) jump = std::max(jump, m.cwiseAbs().sum());
      deltas << ray << ',' << s.t << ',' << s.min_delta << ',' << jump << '\n';
      min_delta = std::min(min_delta, s.min_delta);
      max_jump = std::max(max_jump, jump);
    }
  }
  out << sys.geometry.count() << " rays x " << t.size() << " |rho| values x " << x.size() << " points\n";
  out << "min |Delta_k| = " << min_delta << ", max ||Phat||_1 = " << max_jump << "\n";
  return kPass;
}

int cmd_verify(const Common& c, const std::string& xs, double rho_max, int rho_count, double theta,
               double tol, bool strict, std::ostream& out) {
  FirstOrderConfig cfg;
  cfg.x = increasing(xs, "x-grid");
  if (!(rho_max > 0.0) || rho_count < 2) throw InputError("need --rho-max > 0 and --rho-count >= 2");
  cfg.radii.clear();
  for (int j = rho_count - 1; j >= 0; --j) cfg.radii.push_back(rho_max / std::pow(2.0, j));
  cfg.theta = theta;
  cfg.threshold = tol;
  cfg.execution = c.execution();
  cfg.threads = resolve_threads(c.threads);
  const ValidatedSystem sys = require_valid(load_spec(c.spec));
  for (double ray : sys.geometry.rays)
    if (std::abs(std::remainder(theta - ray, 2.0 * std::numbers::pi)) < 1e-9)
      throw InputError("theta lies on a separation ray; choose an interior direction");

  const QHat qh(sys);
  bool hypotheses = true;
  for (const Membership& m : qh.membership())
    if (!m.member) {
      hypotheses = false;
      out << "note: " << m.function << "_" << m.i + 1 << m.j + 1 << " is not in L1 n Lp: " << m.reason << "\n";
    }

  const FirstOrderReport rep = first_order_residual(sys, cfg);
  {
    std::ofstream csv = open_output(c, "residuals.csv");
    write_residual_csv(csv, rep);
  }
  nlohmann::json summary = first_order_summary(rep);
  summary["hypotheses_met"] = hypotheses;
  open_output(c, "first_order.json") << summary.dump(2) << '\n';

  for (std::size_t i = 0; i < rep.x.size(); ++i) {
    out << "x = " << rep.x[i] << ":";
    for (std::size_t k = 0; k < rep.radii.size(); ++k) out << "  " << rep.residual[k][i];
    out << "  (limit " << tol * rep.qhat_norm[i] << ")"
        << (rep.decreasing[i] ? "" : "  not decreasing") << (rep.small[i] ? "" : "  above limit") << "\n";
  }
  out << (rep.passed() ? "PASS" : "FAIL") << "\n";
  if (strict && !hypotheses) return kAssumption;
  return rep.passed() ? kPass : kNumerical;
}

int cmd_reconstruct(const Common& c, const std::string& xs, const std::string& radii, double tol,
                    int window_order, int nodes, const std::string& mode, std::ostream& out) {
  ReconstructionConfig cfg;
  cfg.x = increasing(xs, "x-grid");
  cfg.radii = increasing(radii, "r-schedule");
  if (cfg.radii.size() < 2) throw InputError("r-schedule needs at least two radii");
  if (nodes < 2 || nodes > 64) throw InputError("--nodes must be in 2..64");
  cfg.window_order = window_order;
  cfg.nodes = nodes;
  if (mode == "averaging") cfg.mode = ExtrapolationMode::Averaging;
  else if (mode == "richardson") cfg.mode = ExtrapolationMode::Richardson;
  else throw InputError("--mode must be 'averaging' or 'richardson'");
  cfg.execution = c.execution();
  cfg.threads = resolve_threads(c.threads);

  const ValidatedSystem sys = require_valid(load_spec(c.spec));
  const ReconstructionResult res = reconstruct_q(sys, cfg);
  {
    std::ofstream csv = open_output(c, "reconstruction.csv");
    write_reconstruction_csv(csv, res);
    std::ofstream history = open_output(c, "convergence.csv");
    write_history_csv(history, res);
  }
  nlohmann::json summary = reconstruction_summary(res);
  summary["tolerance"] = tol;
  double worst = summary["max_error"].get<double>();
  summary["passed"] = res.converged && worst <= tol;
  open_output(c, "summary.json") << summary.dump(2) << '\n';

  out << "max error " << worst << " (tolerance " << tol << "), max |diag| " << res.max_diagonal << "\n";
  out << "increments:";
  for (double v : res.increments) out << ' ' << v;
  out << "\n" << (res.converged ? "averaged sequence converging" : "averaged sequence NOT converging") << "\n";
  return (res.converged && worst <= tol) ? kPass : kNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weyl-type solutions and potential recovery for y' = (A/x + q + rho B) y"};
  app.require_subcommand(1);

  Common common;
  std::string xs = "0.5,1,2";
  std::string radii = "10,20,40,80";
  double rho_max = 40.0, tol = 0.05, theta = std::numbers::pi / 4;
  int rho_count = 8, window_order = 2, nodes = 10;
  bool strict = false;
  std::string mode = "averaging";

  auto* v = app.add_subcommand("validate", "Check the structural hypotheses and Delta0_k != 0");
  add_common(v, common);

  auto* f = app.add_subcommand("forward", "Sample the jump of P on every separation ray");
  add_common(f, common);
  f->add_option("--x-grid", xs, "Comma-separated x values");
  f->add_option("--rho-max", rho_max, "Largest |rho|");
  f->add_option("--rho-count", rho_count, "Equispaced |rho| values in (0, rho-max]");

  auto* a = app.add_subcommand("verify-asymptotics", "Check the first-order large-rho expansion");
  add_common(a, common);
  a->add_option("--x-grid", xs, "Comma-separated x values");
  a->add_option("--rho-max", rho_max, "Largest |rho| of the doubling schedule")->default_val(80.0);
  a->add_option("--rho-count", rho_count, "Schedule length")->default_val(4);
  a->add_option("--theta", theta, "arg rho (interior direction)");
  a->add_option("--tol", tol, "Final residual must not exceed tol * ||qhat(x)||_1");
  a->add_flag("--strict", strict, "Exit 1 when qtilde is outside L1 n Lp");

  auto* r = app.add_subcommand("reconstruct", "Recover q(x) from the jumps of P");
  add_common(r, common);
  r->add_option("--x-grid", xs, "Comma-separated x values");
  r->add_option("--r-schedule", radii, "Increasing truncation radii");
  r->add_option("--tol", tol, "Entrywise error tolerance");
  r->add_option("--window-order", window_order, "Number of nested period windows");
  r->add_option("--nodes", nodes, "Gauss-Legendre nodes per panel");
  r->add_option("--mode", mode, "averaging | richardson");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInput;
  }

  try {
    if (v->parsed()) return cmd_validate(common, out);
    if (f->parsed()) return cmd_forward(common, xs, rho_max, rho_count, out);
    if (a->parsed()) return cmd_verify(common, xs, rho_max, rho_count, theta, tol, strict, out);
    return cmd_reconstruct(common, xs, radii, tol, window_order, nodes, mode, out);
  } catch (const AssumptionError& e) {
    err << "assumption failed: " << e.what() << "\n";
    return kAssumption;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const UsageError& e) {
    err << "invalid request: " << e.what() << "\n";
    return kInput;
  } catch (const nlohmann::json::exception& e) {
    err << "format error: " << e.what() << "\n";
    return kInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace weylrec::cli
