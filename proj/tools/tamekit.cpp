// tamekit: command-line front end.
//
// Exit codes: 0 success, 2 malformed input or arguments, 3 a library
// precondition failed (message printed verbatim), 4 a search campaign
// produced a confirmed candidate.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tamekit/tamekit.hpp"

namespace fs = std::filesystem;
using namespace tamekit;
using io::Json;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitDomain = 3;
constexpr int kExitConfirmed = 4;

struct Options {
  std::uint64_t seed = 42;
  std::optional<double> tol_psd;
  std::optional<double> tol_structure;
  std::string out;
  std::string format = "json";
  double t_max = 1e6;
  std::string mesh;

  Tolerance tolerance() const {
    Tolerance t = default_tolerance();
    if (tol_psd) t.tol_psd = *tol_psd;
    if (tol_structure) t.tol_structure = *tol_structure;
    return t;
  }
};

// Appends a timestamped line to <out>/tamekit.log. Only this file carries
// timestamps, so the primary outputs stay byte-reproducible.
void log_line(const Options& opt, const std::string& msg) {
  if (opt.out.empty()) return;
  fs::create_directories(opt.out);
  std::ofstream log(fs::path(opt.out) / "tamekit.log", std::ios::app);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  log << stamp << " " << msg << "\n";
}

// Writes the artifact to <out>/<name>, or to stdout when no directory is given.
void emit(const Options& opt, const std::string& name, const std::string& content) {
  if (opt.out.empty()) {
    std::cout << content;
  } else {
    io::atomic_write(fs::path(opt.out) / name, content);
    log_line(opt, "wrote " + name);
  }
}

void emit_file(const Options& opt, const std::string& name, const std::string& content) {
  if (!opt.out.empty()) emit(opt, name, content);
}

std::vector<int> parse_mesh(const std::string& mesh) {
  std::vector<int> out;
  std::stringstream ss(mesh);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("mesh '" + mesh + "' must look like 8x8x8x8 or 32x8");
    }
  }
  if (out.empty()) throw ParseError("empty mesh description");
  return out;
}

int cmd_power(const Options& opt, const std::string& input, double r) {
  const Json doc = io::read_json(input);
  const Tolerance tol = opt.tolerance();
  Json out;
  if (io::is_complex_matrix(doc)) {
    const SlitMatrix a(io::parse_complex_matrix(doc, input), tol);
    const CMatrix x = a.power(r);
    out["result"] = io::complex_matrix_json(x);
    const double back =
        r != 0.0 ? (principal_power(x, 1.0 / r, tol) - a.matrix()).norm() / linalg::scale(a.matrix().norm())
                 : 0.0;
    out["checks"] = {{"inverse_power_residual", io::number(back)}};
  } else {
    const Matrix am = io::parse_matrix(doc, input);
    const SlitMatrix a(am, tol);
    double imag = 0.0;
    const Matrix x = a.real_power(r, &imag);
    out["result"] = io::matrix_json(x);
    double back = 0.0;
    if (r != 0.0) {
      back = (principal_power(x, 1.0 / r, tol) - am).norm() / linalg::scale(am.norm());
    }
    out["checks"] = {{"inverse_power_residual", io::number(back)},
                     {"imaginary_residual", io::number(imag)}};
  }
  out["r"] = io::number(r);
  emit(opt, "power.json", io::dump(out));
  return 0;
}

int cmd_retract(const Options& opt, const std::string& input) {
  const Tolerance tol = opt.tolerance();
  const Matrix b = io::parse_matrix(io::read_json(input), input);
  const ComplexStructure j = retraction_j(NoRealEigMatrix(b, tol), tol);
  const Matrix& jm = j.matrix();
  const Eigen::Index m = jm.rows();
  Json out;
  out["result"] = io::matrix_json(jm);
  out["checks"] = {
      {"square_plus_identity", io::number((jm * jm + Matrix::Identity(m, m)).norm())},
      {"idempotence", io::number((retraction_j(jm, tol).matrix() - jm).norm())},
      {"commutator_with_input", io::number((jm * b - b * jm).norm())}};
  emit(opt, "retract.json", io::dump(out));
  return 0;
}

int cmd_interp(const Options& opt, const std::string& input, std::vector<double> t) {
  const Tolerance tol = opt.tolerance();
  const Json doc = io::read_json(input);
  if (!doc.is_object() || !doc.contains("structures") || !doc["structures"].is_array()) {
    throw ParseError(input + ": expected {\"structures\": [matrix, ...], \"omega\": matrix?, \"t\": [...]?}");
  }
  std::vector<ComplexStructure> js;
  for (std::size_t i = 0; i < doc["structures"].size(); ++i) {
    js.emplace_back(io::parse_matrix(doc["structures"][i], "structures[" + std::to_string(i) + "]"), tol);
  }
  if (t.empty() && doc.contains("t")) {
    for (const auto& x : doc["t"]) t.push_back(io::parse_number(x, "t"));
  }
  const SimplexPoint point =
      t.empty() ? SimplexPoint::barycenter(js.size()) : SimplexPoint(std::move(t));
  std::optional<SkewForm> omega;
  if (doc.contains("omega")) omega.emplace(io::parse_matrix(doc["omega"], "omega"), tol);

  const ComplexStructure j = interpolate_simplex(js, point, omega, tol);
  const Matrix& jm = j.matrix();
  const Eigen::Index m = jm.rows();
  Json checks;
  checks["square_plus_identity"] = io::number((jm * jm + Matrix::Identity(m, m)).norm());
  if (omega) {
    std::vector<double> margins, residuals;
    for (const auto& v : js) {
      margins.push_back(taming_margin(*omega, v));
      residuals.push_back(invariance_residual(omega->matrix(), v.matrix()));
    }
    checks["vertex_margins"] = io::numbers_json(margins);
    checks["vertex_compatibility_residuals"] = io::numbers_json(residuals);
    checks["margin"] = io::number(taming_margin(*omega, j));
    checks["compatibility_residual"] = io::number(invariance_residual(omega->matrix(), jm));
    checks["tame"] = is_tame(*omega, j, tol);
    checks["compatible"] = is_compatible(*omega, j, tol);
  }
  Json out;
  out["result"] = io::matrix_json(jm);
  out["t"] = io::numbers_json(point.coords());
  out["checks"] = std::move(checks);
  emit(opt, "interp.json", io::dump(out));
  return 0;
}

int cmd_splice(const Options& opt, const std::string& input) {
  const Tolerance tol = opt.tolerance();
  const LocalPatchSet set = io::parse_patch_set(io::read_json(input));
  const auto spliced = splice_partition(set, tol);
  Json points = Json::array();
  for (const auto& p : spliced) {
    points.push_back({{"id", p.id},
                      {"J", io::matrix_json(p.structure.matrix())},
                      {"pushforward", io::matrix_json(p.pushforward)},
                      {"naturality_residual", io::number(p.naturality_residual)},
                      {"margin", io::number(p.margin)},
                      {"pushforwards_agree", p.pushforwards_agree}});
  }
  emit(opt, "splice.json", io::dump(Json{{"points", std::move(points)}}));
  return 0;
}

int cmd_search(const Options& opt, const std::string& config, bool seed_given) {
  SearchCampaign cfg = io::parse_campaign(io::read_json(config));
  if (seed_given) cfg.seed = opt.seed;
  const CampaignReport rep = run_campaign(cfg, opt.tolerance());
  log_line(opt, "campaign: " + std::to_string(rep.records.size()) + " records, global min " +
                    io::csv_number(rep.global_min) + ", " + std::to_string(rep.candidates.size()) +
                    " candidates, acceptance rate " + io::csv_number(rep.acceptance_rate));
  if (opt.format == "csv") emit(opt, "report.csv", io::report_csv(rep));
  else emit(opt, "report.json", io::dump(io::report_json(rep)));
  emit_file(opt, "candidates.json", io::dump(io::candidates_json(rep)));
  std::cerr << "global_min " << io::csv_number(rep.global_min) << " candidates "
            << rep.candidates.size() << " confirmed " << rep.count(Verdict::confirmed) << "\n";
  return rep.count(Verdict::confirmed) > 0 ? kExitConfirmed : 0;
}

int cmd_fib(const Options& opt, const std::string& generator, const std::string& input, int n,
            const std::string& t_arg) {
  const Tolerance tol = opt.tolerance();
  SampledFibration fib;
  if (generator == "product") {
    ProductBundleParams p;
    if (!opt.mesh.empty()) {
      const auto mesh = parse_mesh(opt.mesh);
      if (mesh.size() == 2) {
        p.fiber_mesh = mesh[0];
        p.base_mesh = mesh[1];
      } else if (mesh.size() == 4 && mesh[0] == mesh[1] && mesh[2] == mesh[3]) {
        p.fiber_mesh = mesh[0];
        p.base_mesh = mesh[2];
      } else {
        throw ParseError("product mesh must be AxAxBxB or AxB, got '" + opt.mesh + "'");
      }
    }
    fib = generate_product_bundle(p);
  } else if (generator == "projectivization") {
    ProjectivizationParams p;
    p.n = n;
    p.seed = opt.seed;
    if (!opt.mesh.empty()) {
      const auto mesh = parse_mesh(opt.mesh);
      if (mesh.size() != 2) throw ParseError("projectivization mesh must be PxR, got '" + opt.mesh + "'");
      p.sphere_points = mesh[0];
      p.radii = mesh[1];
    }
    fib = generate_projectivization(p);
  } else if (generator == "file") {
    if (input.empty()) throw ParseError("fib file: --input is required");
    fib = io::parse_fibration(io::read_json(input));
    validate_fibration(fib, tol);
  } else {
    throw ParseError("unknown generator '" + generator + "' (product, projectivization, file)");
  }

  const ThresholdReport thr = taming_thresholds(fib, opt.t_max, tol);
  double t = 0.0;
  if (t_arg == "auto") {
    t = std::isfinite(thr.threshold) ? 0.5 * thr.threshold : 1.0;
  } else {
    try {
      t = std::stod(t_arg);
    } catch (const std::exception&) {
      throw ParseError("--t must be a number or 'auto', got '" + t_arg + "'");
    }
  }
  const auto forms = assemble_omega_t(fib, t, thr.threshold, 0.05, tol);

  Json points = Json::array();
  for (std::size_t i = 0; i < forms.size(); ++i) {
    points.push_back({{"id", forms[i].id},
                      {"t0", io::number(thr.rows[i].t0)},
                      {"margin_at_t", io::number(forms[i].margin)},
                      {"pfaffian_sign", forms[i].pfaffian > 0 ? 1 : -1}});
  }
  Json report;
  report["generator"] = fib.generator;
  report["mesh"] = fib.mesh;
  report["samples"] = fib.samples.size();
  report["threshold"] = io::number(thr.threshold);
  report["t"] = io::number(t);
  report["points"] = std::move(points);

  log_line(opt, "fib " + fib.generator + " threshold " + io::csv_number(thr.threshold));
  if (opt.format == "csv") emit(opt, "thresholds.csv", io::threshold_csv(thr));
  else emit(opt, "fib_report.json", io::dump(report));
  if (opt.format == "csv") emit_file(opt, "fib_report.json", io::dump(report));
  else emit_file(opt, "thresholds.csv", io::threshold_csv(thr));
  emit_file(opt, "fibration.json", io::dump(io::fibration_json(fib)));
  std::cerr << "threshold " << io::csv_number(thr.threshold) << "\n";
  return 0;
}

int cmd_radial(const Options& opt, int n) {
  if (n < 1) throw DomainError("positive_n", "n = " + std::to_string(n));
  int nt = 10, nr = 10;
  if (!opt.mesh.empty()) {
    const auto mesh = parse_mesh(opt.mesh);
    if (mesh.size() != 2 || mesh[0] < 1 || mesh[1] < 1) {
      throw ParseError("radial mesh must be TxR, got '" + opt.mesh + "'");
    }
    nt = mesh[0];
    nr = mesh[1];
  }
  Rng rng(opt.seed);
  std::normal_distribution<double> normal;
  CVector u(n);
  for (int k = 0; k < n; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    u(k) = Complex(re, im);
  }
  u.normalize();

  std::string csv = "t,r,residual\n";
  double worst = 0.0;
  for (int a = 0; a < nt; ++a) {
    // t log-spaced over [0.1, 10], r evenly over [0.5, 2]
    const double t = nt == 1 ? 1.0 : 0.1 * std::pow(100.0, a / double(nt - 1));
    for (int b = 0; b < nr; ++b) {
      const double r = nr == 1 ? 1.0 : 0.5 + 1.5 * b / double(nr - 1);
      const double res = radial_change_check(t, r * u);
      worst = std::max(worst, res);
      csv += io::csv_number(t) + "," + io::csv_number(r) + "," + io::csv_number(res) + "\n";
    }
  }
  if (opt.format == "json") {
    Json rows = Json::array();
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    while (std::getline(ss, line)) {
      double t, r, res;
      std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &r, &res);
      rows.push_back({io::number(t), io::number(r), io::number(res)});
    }
    emit(opt, "radial.json",
         io::dump(Json{{"n", n}, {"columns", {"t", "r", "residual"}}, {"rows", rows},
                       {"max_residual", io::number(worst)}}));
  } else {
    emit(opt, "radial.csv", csv);
  }
  std::cerr << "max_residual " << io::csv_number(worst) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tamekit: complex structures, taming forms and sampled fibrations"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  auto* seed_opt = app.add_option("--seed", opt.seed, "random seed (default 42)");
  app.add_option("--tol-psd", opt.tol_psd, "positivity tolerance for taming margins");
  app.add_option("--tol-structure", opt.tol_structure, "tolerance for J^2 = -I");
  app.add_option("--out", opt.out, "output directory (default: stdout)");
  app.add_option("--format", opt.format, "primary output format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--t-max", opt.t_max, "upper end of the t search for taming thresholds");
  app.add_option("--mesh", opt.mesh, "mesh, e.g. 8x8x8x8 (product), 32x8 (projectivization), 10x10 (radial)");

  std::string input;
  double r = 0.5;
  auto* power = app.add_subcommand("power", "principal matrix power A^r");
  power->add_option("input", input, "matrix JSON")->required();
  power->add_option("-r,--r", r, "exponent (default 0.5)");

  auto* retract = app.add_subcommand("retract", "j(B) = B (-B^2)^{-1/2}");
  retract->add_option("input", input, "matrix JSON")->required();

  std::vector<double> t;
  auto* interp = app.add_subcommand("interp", "j(sum t_i J_i)");
  interp->add_option("input", input, "structures JSON")->required();
  interp->add_option("-t,--t", t, "simplex coordinates (default: file, else barycenter)")->delimiter(',');

  auto* splice = app.add_subcommand("splice", "partition-of-unity splicing of a patch set");
  splice->add_option("input", input, "patch set JSON")->required();

  auto* search = app.add_subcommand("search", "run a taming search campaign");
  search->add_option("config", input, "campaign JSON")->required();

  std::string generator = "product";
  std::string t_arg = "auto";
  int n = 2;
  auto* fib = app.add_subcommand("fib", "taming thresholds of a sampled fibration");
  fib->add_option("generator", generator, "product, projectivization or file");
  fib->add_option("--input", input, "fib/1 JSON for the file generator");
  fib->add_option("--n", n, "complex dimension for projectivization");
  fib->add_option("--t", t_arg, "t for assembling omega_t, or auto");

  auto* radial = app.add_subcommand("radial", "radial change-of-variables residual table");
  radial->add_option("--n", n, "complex dimension (default 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    log_line(opt, "start " + app.get_subcommands().front()->get_name());
    int code = 0;
    if (*power) code = cmd_power(opt, input, r);
    else if (*retract) code = cmd_retract(opt, input);
    else if (*interp) code = cmd_interp(opt, input, t);
    else if (*splice) code = cmd_splice(opt, input);
    else if (*search) code = cmd_search(opt, input, seed_opt->count() > 0);
    else if (*fib) code = cmd_fib(opt, generator, input, n, t_arg);
    else if (*radial) code = cmd_radial(opt, n);
    log_line(opt, "exit " + std::to_string(code));
    return code;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    log_line(opt, std::string("error ") + e.what());
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
