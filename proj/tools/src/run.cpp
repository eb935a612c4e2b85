#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "sparsecert/applications.hpp"
#include "sparsecert/greedy_path.hpp"
#include "sparsecert/optimality.hpp"
#include "sparsecert/oracle.hpp"
#include "sparsecert/synthetic.hpp"
#include "sparsecert_cli/cli.hpp"

namespace sparsecert::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json one_based(const IndexSet& idx) {
  json out = json::array();
  for (int i : idx) out.push_back(i + 1);
  return out;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_indices(const IndexSet& idx) {
  std::string s;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (j) s += ';';
    s += std::to_string(idx[j] + 1);
  }
  return s;
}

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = std::make_shared<spdlog::logger>("sparsecert",
                                              std::make_shared<spdlog::sinks::stderr_sink_mt>());
    const char* env = std::getenv("SPARSE_EIG_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return log;
}

EigOptions eig_options(const RunConfig& c) {
  EigOptions e;
  e.eig_tol = c.eig_tol;
  return e;
}

CertifyOptions certify_options(const RunConfig& c) {
  CertifyOptions o;
  o.cert_tol = c.cert_tol;
  o.report_tol = c.report_tol;
  o.eps_rel = c.eps_rel;
  o.eig = eig_options(c);
  return o;
}

int require_positive(const std::optional<int>& v, const char* flag) {
  if (!v) throw InvalidArgument(std::string(flag) + " is required for this command");
  if (*v < 1) throw InvalidArgument(std::string(flag) + " must be >= 1");
  return *v;
}

Matrix load(const RunConfig& c) {
  if (c.input.empty()) throw InvalidArgument("an input file is required");
  return read_matrix(c.input);
}

CovarianceModel load_covariance(const RunConfig& c) {
  Matrix m = load(c);
  if (c.mode == InputMode::Gram) {
    logger()->info("gram input {}x{}", m.rows(), m.cols());
    return CovarianceModel::from_covariance(SymMatrix(m));
  }
  if (c.center.value_or(true)) center_columns(m);
  logger()->info("data input {}x{}, factor used directly", m.rows(), m.cols());
  return CovarianceModel::from_factor(FactorMatrix(std::move(m)));
}

SubsetProblem load_subset(const RunConfig& c) {
  Matrix m = load(c);
  if (m.cols() < 2) throw InvalidArgument("subset input needs at least two columns (X then y)");
  if (c.center.value_or(false)) center_columns(m);
  SubsetProblem p{m.leftCols(m.cols() - 1), m.col(m.cols() - 1)};
  p.validate();
  return p;
}

PathOptions path_options(const RunConfig& c) {
  PathOptions o;
  o.k_max = c.k.value_or(0);
  if (o.k_max < 0) throw InvalidArgument("--k must be >= 0");
  o.rho = c.rho;
  o.lookahead = c.lookahead;
  o.eig = eig_options(c);
  return o;
}

json point_json(const PathPoint& p) {
  json w = json::array();
  for (int i : p.indices) w.push_back(p.loadings(i));
  return {{"k", p.k},
          {"indices", one_based(p.indices)},
          {"added", p.added + 1},
          {"variance", p.variance},
          {"score", num(p.score)},
          {"weights", w}};
}

json certificate_json(const Certificate& c) {
  const double k = static_cast<double>(c.pattern.size());
  return {{"pattern", one_based(c.pattern)},
          {"variance", c.variance},
          {"rho_min", c.rho_min},
          {"rho_max", c.rho_max},
          {"rho_star", num(c.rho_star)},
          {"gap", num(c.gap)},
          {"primal", num(c.primal)},
          {"relative_gap", num(c.relative_gap)},
          {"phi_upper", num(c.phi_upper)},
          {"card_bound", num(c.phi_upper + c.rho_star * k)},
          {"status", std::string(to_string(c.status))},
          {"within_report_tol", c.within_report_tol},
          {"iterations", c.iterations}};
}

json cmd_path(const RunConfig& c, std::string* csv) {
  const CovarianceModel model = load_covariance(c);
  std::vector<PathMethod> methods;
  if (c.method.empty() || c.method == "all") {
    methods = {PathMethod::Sort, PathMethod::Threshold, PathMethod::GreedyFull,
               PathMethod::GreedyApprox};
  } else {
    methods = {parse_path_method(c.method)};
  }
  json paths = json::array();
  std::ostringstream table;
  table << "method,k,added,variance,score,indices\n";
  for (PathMethod m : methods) {
    const Path path = compute_path(model, m, path_options(c));
    json points = json::array();
    for (const auto& p : path.points) {
      points.push_back(point_json(p));
      table << to_string(m) << ',' << p.k << ',' << p.added + 1 << ',' << csv_num(p.variance)
            << ',' << csv_num(p.score) << ',' << csv_indices(p.indices) << '\n';
    }
    paths.push_back({{"method", std::string(to_string(m))}, {"points", points}});
  }
  if (csv) *csv = table.str();
  return {{"paths", paths}};
}

json cmd_certify(const RunConfig& c, std::string* csv) {
  const CovarianceModel model = load_covariance(c);
  IndexSet pattern;
  if (!c.pattern.empty()) {
    for (int i : c.pattern) {
      if (i < 1) throw InvalidArgument("--pattern indices are 1-based");
      pattern.push_back(i - 1);
    }
  } else if (c.k) {
    const int k = require_positive(c.k, "--k");
    PathOptions o = path_options(c);
    o.k_max = k;
    const Path path = compute_path(
        model, c.method.empty() ? PathMethod::GreedyApprox : parse_path_method(c.method), o);
    if (static_cast<int>(path.points.size()) < k) {
      throw InvalidArgument("path stops before k = " + std::to_string(k));
    }
    pattern = path.points.back().indices;
  } else {
    throw InvalidArgument("certify needs --pattern or --k");
  }
  const Certificate cert = minimize_gap(model.factor(), pattern, certify_options(c));
  if (csv) {
    std::ostringstream t;
    t << "k,variance,rho_min,rho_max,rho_star,gap,relative_gap,phi_upper,status,indices\n"
      << cert.pattern.size() << ',' << csv_num(cert.variance) << ',' << csv_num(cert.rho_min)
      << ',' << csv_num(cert.rho_max) << ',' << csv_num(cert.rho_star) << ','
      << csv_num(cert.gap) << ',' << csv_num(cert.relative_gap) << ','
      << csv_num(cert.phi_upper) << ',' << to_string(cert.status) << ','
      << csv_indices(cert.pattern) << '\n';
    *csv = t.str();
  }
  return {{"certificate", certificate_json(cert)}};
}

json cmd_bound(const RunConfig& c, std::string* csv) {
  const CovarianceModel model = load_covariance(c);
  const PathMethod method =
      c.method.empty() ? PathMethod::GreedyApprox : parse_path_method(c.method);
  const Path path = compute_path(model, method, path_options(c));
  BoundOptions bo;
  bo.grid_size = c.rho_grid;
  bo.jobs = c.jobs;
  bo.certify = certify_options(c);
  const DualBounds dual = collect_dual_bounds(model, path, bo);
  const std::vector<CurvePoint> curve = tradeoff_curve(path, dual);

  json bounds = json::array();
  for (const auto& b : dual.bounds) bounds.push_back({{"rho", b.rho}, {"phi_upper", b.phi_upper}});
  json rows = json::array();
  std::ostringstream t;
  t << "k,variance,upper_bound,gap,certified\n";
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const CurvePoint& p = curve[j];
    const Certificate& cert = dual.certificates[j];
    rows.push_back({{"k", p.k},
                    {"indices", one_based(path.points[j].indices)},
                    {"variance", p.variance},
                    {"upper_bound", p.upper_bound},
                    {"gap", p.gap},
                    {"relative_gap", p.gap / p.variance},
                    {"certified", p.certified},
                    {"status", std::string(to_string(cert.status))},
                    {"within_report_tol", cert.within_report_tol}});
    t << p.k << ',' << csv_num(p.variance) << ',' << csv_num(p.upper_bound) << ','
      << csv_num(p.gap) << ',' << (p.certified ? 1 : 0) << '\n';
  }
  if (csv) *csv = t.str();
  return {{"method", std::string(to_string(method))}, {"bounds", bounds}, {"curve", rows}};
}

json cmd_subset(const RunConfig& c, std::string* csv) {
  const SubsetProblem problem = load_subset(c);
  const int k = require_positive(c.k, "--k");
  std::vector<std::pair<std::string, SubsetDirection>> dirs;
  if (c.method.empty() || c.method == "both") {
    dirs = {{"forward", SubsetDirection::Forward}, {"backward", SubsetDirection::Backward}};
  } else if (c.method == "forward") {
    dirs = {{"forward", SubsetDirection::Forward}};
  } else if (c.method == "backward") {
    dirs = {{"backward", SubsetDirection::Backward}};
  } else {
    throw InvalidArgument("subset --method must be forward, backward or both");
  }
  SubsetOptions so;
  so.grid_size = c.rho_grid;
  so.jobs = c.jobs;
  so.certify = certify_options(c);

  json results = json::array();
  std::ostringstream t;
  t << "direction,k,residual,lower,bound,status,indices\n";
  for (const auto& [name, dir] : dirs) {
    const IndexSet pattern = greedy_subset(problem, k, dir);
    const SubsetCertificate cert = subset_certify(problem, pattern, so);
    results.push_back({{"direction", name},
                       {"pattern", one_based(cert.pattern)},
                       {"s0", cert.s0},
                       {"residual", cert.upper},
                       {"error_upper", cert.upper},
                       {"error_lower", num(cert.lower)},
                       {"bound", cert.bound},
                       {"shift", cert.shift},
                       {"status", std::string(to_string(cert.status))}});
    t << name << ',' << k << ',' << csv_num(cert.upper) << ',' << csv_num(cert.lower) << ','
      << csv_num(cert.bound) << ',' << to_string(cert.status) << ','
      << csv_indices(cert.pattern) << '\n';
  }
  if (csv) *csv = t.str();
  return {{"selections", results}};
}

json cmd_rip(const RunConfig& c, std::string* csv) {
  const Matrix f = load(c);
  const int s = require_positive(c.S, "--S");
  RipOptions ro;
  ro.grid_size = c.rho_grid;
  ro.jobs = c.jobs;
  ro.certify = certify_options(c);
  const RipReport r = rip_bounds(f, s, ro);
  json levels = json::array();
  std::ostringstream t;
  t << "cardinality,upper_max_eig,lower_min_eig,delta_upper\n";
  for (const auto& l : r.levels) {
    levels.push_back({{"cardinality", l.cardinality},
                      {"upper_max_eig", l.upper_max_eig},
                      {"lower_min_eig", l.lower_min_eig},
                      {"delta_upper", l.delta_upper}});
    t << l.cardinality << ',' << csv_num(l.upper_max_eig) << ',' << csv_num(l.lower_min_eig)
      << ',' << csv_num(l.delta_upper) << '\n';
  }
  if (csv) *csv = t.str();
  return {{"S", r.S},
          {"upper_max_eig", r.upper_max_eig},
          {"lower_min_eig", r.lower_min_eig},
          {"delta_upper", r.delta_upper},
          {"ct_holds", r.ct_holds},
          {"levels", levels}};
}

json cmd_oracle(const RunConfig& c, std::string* csv) {
  const OracleBudget budget{c.budget};
  std::ostringstream t;
  json out = {{"kind", c.kind}};
  if (c.kind == "sparse-eig") {
    const CovarianceModel model = load_covariance(c);
    const int n = model.dim();
    const int k_max = c.k ? std::min(require_positive(c.k, "--k"), n) : n;
    json rows = json::array();
    t << "k,value,indices\n";
    for (int k = 1; k <= k_max; ++k) {
      const OracleResult r = exact_sparse_eigmax(model.sigma(), k, budget);
      rows.push_back({{"k", k}, {"value", r.value}, {"pattern", one_based(r.pattern)}});
      t << k << ',' << csv_num(r.value) << ',' << csv_indices(r.pattern) << '\n';
    }
    out["results"] = rows;
  } else if (c.kind == "phi") {
    if (!c.rho) throw InvalidArgument("oracle --kind phi needs --rho");
    const CovarianceModel model = load_covariance(c);
    const OracleResult r = exact_phi(model.sigma(), *c.rho, budget);
    out["results"] = {{"rho", *c.rho}, {"value", r.value}, {"pattern", one_based(r.pattern)}};
    t << "rho,value,indices\n" << csv_num(*c.rho) << ',' << csv_num(r.value) << ','
      << csv_indices(r.pattern) << '\n';
  } else if (c.kind == "subset") {
    const SubsetProblem problem = load_subset(c);
    const OracleResult r = exact_subset(problem, require_positive(c.k, "--k"), budget);
    out["results"] = {{"k", *c.k}, {"residual", r.value}, {"pattern", one_based(r.pattern)}};
    t << "k,residual,indices\n" << *c.k << ',' << csv_num(r.value) << ','
      << csv_indices(r.pattern) << '\n';
  } else if (c.kind == "delta") {
    const Matrix f = load(c);
    const int s = require_positive(c.S, "--S");
    const double d = exact_delta(f, s, budget);
    out["results"] = {{"S", s}, {"delta", d}};
    t << "S,delta\n" << s << ',' << csv_num(d) << '\n';
  } else {
    throw InvalidArgument("oracle --kind must be sparse-eig, phi, subset or delta");
  }
  if (csv) *csv = t.str();
  return out;
}

Matrix synth_matrix(const RunConfig& c) {
  if (c.generator == "spiked-uniform") {
    return synthetic::spiked_uniform(c.n, c.strength, c.seed).sigma.dense();
  }
  if (c.generator == "spiked-gaussian") {
    return synthetic::spiked_gaussian(c.n, c.k.value_or(std::max(1, c.n / 3)), c.strength, c.seed)
        .sigma.dense();
  }
  if (c.generator == "regression") {
    const auto r = synthetic::planted_regression(c.p, c.n, require_positive(c.k, "--k"), c.noise,
                                                 c.seed);
    Matrix m(r.problem.X.rows(), r.problem.X.cols() + 1);
    m << r.problem.X, r.problem.y;
    return m;
  }
  if (c.generator == "gaussian") {
    return synthetic::gaussian_matrix(c.p, c.n, c.seed, 1.0 / std::sqrt(std::max(c.p, 1)));
  }
  throw InvalidArgument("unknown generator '" + c.generator + "'");
}

json config_json(const RunConfig& c) {
  auto opt_int = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
  json pattern = json::array();
  for (int i : c.pattern) pattern.push_back(i);
  return {{"input", c.input},
          {"mode", c.mode == InputMode::Gram ? "gram" : "data"},
          {"center", c.center ? json(*c.center) : json(nullptr)},
          {"k", opt_int(c.k)},
          {"S", opt_int(c.S)},
          {"pattern", pattern},
          {"rho", c.rho ? json(*c.rho) : json(nullptr)},
          {"method", c.method},
          {"kind", c.kind},
          {"rho_grid", c.rho_grid},
          {"lookahead", c.lookahead},
          {"jobs", c.jobs},
          {"seed", c.seed},
          {"budget", c.budget},
          {"format", c.format == OutputFormat::Json ? "json" : "csv"}};
}

json tolerances_json(const RunConfig& c) {
  const SqrtOptions s;
  return {{"cert_tol", c.cert_tol}, {"report_tol", c.report_tol}, {"eig_tol", c.eig_tol},
          {"eps_rel", c.eps_rel},   {"psd_slack", s.psd_slack},   {"sqrt_tol", s.sqrt_tol}};
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("input", c.input, "Matrix file (comma or whitespace delimited)");
  sub->add_option("--mode", c.mode, "Input interpretation")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, InputMode>{{"gram", InputMode::Gram}, {"data", InputMode::Data}}));
  sub->add_flag_callback("--center", [&c] { c.center = true; }, "Center data columns");
  sub->add_flag_callback("--no-center", [&c] { c.center = false; }, "Keep data uncentered");
  sub->add_option("--k", c.k, "Target cardinality");
  sub->add_option("--S", c.S, "Target sparsity for restricted isometry bounds");
  sub->add_option("--pattern", c.pattern, "Comma separated 1-based indices")->delimiter(',');
  sub->add_option("--rho", c.rho, "Penalty value");
  sub->add_option("--method", c.method, "Path method or subset direction");
  sub->add_option("--kind", c.kind, "Oracle target: sparse-eig, phi, subset, delta");
  sub->add_option("--rho-grid", c.rho_grid, "Number of penalty grid points")
      ->check(CLI::PositiveNumber);
  sub->add_option("--cert-tol", c.cert_tol, "Relative gap for an Optimal status");
  sub->add_option("--report-tol", c.report_tol, "Relative gap reported as optimal on curves");
  sub->add_option("--eig-tol", c.eig_tol, "Eigen residual tolerance");
  sub->add_option("--eps", c.eps_rel, "Relative bisection tolerance");
  sub->add_option("--lookahead", c.lookahead, "Candidates evaluated exactly per greedy step")
      ->check(CLI::PositiveNumber);
  sub->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Seed for generators");
  sub->add_option("--budget", c.budget, "Oracle enumeration budget");
  sub->add_option("--format", c.format, "Output format")
      ->transform(CLI::CheckedTransformer(std::map<std::string, OutputFormat>{
          {"json", OutputFormat::Json}, {"csv", OutputFormat::Csv}}));
  sub->add_option("--out", c.out, "Write the report to this file");
}

}  // namespace

void configure(CLI::App& app, RunConfig& c) {
  app.require_subcommand(1);
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"path", "Candidate patterns for every cardinality"},
      {"certify", "Certify one pattern"},
      {"bound", "Dual upper bounds and the variance/cardinality tradeoff curve"},
      {"subset", "Greedy subset selection with optimality certificates (last column is y)"},
      {"rip", "Bounds on restricted isometry constants"},
      {"oracle", "Exhaustive reference values"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, c);
    sub->callback([&c, n = std::string(name)] { c.command = n; });
  }
  CLI::App* synth = app.add_subcommand("synth", "Write a seeded synthetic matrix");
  synth->add_option("--generator", c.generator,
                    "spiked-uniform, spiked-gaussian, regression or gaussian");
  synth->add_option("--n", c.n, "Number of variables")->required();
  synth->add_option("--p", c.p, "Number of samples");
  synth->add_option("--k", c.k, "Support size");
  synth->add_option("--strength", c.strength, "Spike strength");
  synth->add_option("--noise", c.noise, "Noise level");
  synth->add_option("--seed", c.seed, "Seed");
  synth->add_option("--out", c.out, "Output file");
  synth->callback([&c] { c.command = "synth"; });
}

json build_report(const RunConfig& c, std::string* csv) {
  json results;
  if (c.command == "path") {
    results = cmd_path(c, csv);
  } else if (c.command == "certify") {
    results = cmd_certify(c, csv);
  } else if (c.command == "bound") {
    results = cmd_bound(c, csv);
  } else if (c.command == "subset") {
    results = cmd_subset(c, csv);
  } else if (c.command == "rip") {
    results = cmd_rip(c, csv);
  } else if (c.command == "oracle") {
    results = cmd_oracle(c, csv);
  } else {
    throw InvalidArgument("unknown command '" + c.command + "'");
  }
  return {{"command", c.command},
          {"version", kVersion},
          {"config", config_json(c)},
          {"tolerances", tolerances_json(c)},
          {"results", results}};
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    std::string text;
    if (c.command == "synth") {
      const Matrix m = synth_matrix(c);
      std::ostringstream t;
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) t << (j ? "," : "") << csv_num(m(i, j));
        t << '\n';
      }
      text = t.str();
    } else {
      std::string csv;
      const json report = build_report(c, &csv);
      text = c.format == OutputFormat::Csv ? csv : report.dump(2) + "\n";
    }
    if (c.out.empty()) {
      out << text;
    } else {
      std::ofstream file(c.out);
      if (!file) throw InvalidArgument("cannot write '" + c.out + "'");
      file << text;
    }
    return kSuccess;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kBudgetExceeded;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NotSquare& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NotPositiveSemidefinite& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const EmptyPattern& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse PCA paths, optimality certificates and sparse eigenvalue bounds"};
  app.set_version_flag("--version", kVersion);
  RunConfig config;
  configure(app, config);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  logger()->debug("command {}", config.command);
  return run(config, out, err);
}

}  // namespace sparsecert::cli
