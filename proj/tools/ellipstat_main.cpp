// Command-line front end: simulate / test / estimate / report.
//
// Exit codes: 0 success, 2 usage or config error, 3 statistical/runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ellipstat/csv.hpp"
#include "ellipstat/errors.hpp"
#include "ellipstat/estimators.hpp"
#include "ellipstat/linalg.hpp"
#include "ellipstat/pca_cca.hpp"
#include "ellipstat/scenario.hpp"
#include "ellipstat/simulate.hpp"
#include "ellipstat/sparse_opt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int env_threads() {
  const char* raw = std::getenv("ELLIPSTAT_THREADS");
  if (!raw) return 0;
  const int value = std::atoi(raw);
  if (value < 1) throw ellipstat::ConfigError("ELLIPSTAT_THREADS must be >= 1");
  return value;
}

std::map<std::string, double> parse_options(const std::vector<std::string>& kv) {
  std::map<std::string, double> out;
  for (const std::string& item : kv) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ellipstat::ConfigError("option '" + item + "' is not of the form k=v");
    char* end = nullptr;
    const double value = std::strtod(item.c_str() + eq + 1, &end);
    if (end == item.c_str() + eq + 1 || *end != '\0')
      throw ellipstat::ConfigError("option '" + item + "' has a non-numeric value");
    out[item.substr(0, eq)] = value;
  }
  return out;
}

json result_to_json(const ellipstat::TestResult& res,
                    const std::map<std::string, double>& options) {
  json out;
  out["name"] = res.name;
  out["statistic"] = res.statistic;
  out["pvalue"] = res.pvalue;
  out["calibration"]["family"] =
      ellipstat::calibration_family_name(res.calibration.family);
  for (const auto& [k, v] : res.calibration.parameters)
    out["calibration"][k] = v;
  out["nuisance"] = res.nuisance;
  out["options_used"] = options;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ellipstat::ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 int cli_threads) {
  ellipstat::ScenarioConfig cfg = ellipstat::load_scenario(config_path);
  int threads = cfg.threads;
  if (const int env = env_threads(); env > 0) threads = env;
  if (cli_threads > 0) threads = cli_threads;

  ellipstat::SimulationOutput out = ellipstat::run_simulation(cfg, threads);

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "results.csv", ellipstat::results_to_csv(out));
  write_text(fs::path(out_dir) / "results.json",
             ellipstat::results_to_json(out, cfg));

  std::cerr << "completed " << cfg.reps << " replications in "
            << ellipstat::format_double(out.total_wall_time_sec) << " s ("
            << threads << " threads)\n";
  for (const ellipstat::ResultRow& row : out.rows) {
    std::cout << row.test << ": rejection_rate="
              << ellipstat::format_double(row.rejection_rate)
              << " (completed=" << row.reps_completed
              << ", failed=" << row.reps_failed << ")\n";
  }
  return 0;
}

int cmd_test(const std::string& data_path, const std::string& data2_path,
             const std::string& method, const std::vector<std::string>& raw_opts) {
  std::map<std::string, double> options = parse_options(raw_opts);
  ellipstat::DataMatrix d1 = ellipstat::read_csv(data_path);
  std::optional<ellipstat::DataMatrix> d2;
  if (!data2_path.empty()) {
    d2 = ellipstat::read_csv(data2_path);
    if (d2->cols() != d1.cols())
      ellipstat::fail(ellipstat::ErrorCode::InvalidInput,
                      "the two samples have different dimensions");
  }
  ellipstat::TestResult res = ellipstat::run_named_test(
      method, options, d1, d2 ? &*d2 : nullptr);
  std::cout << result_to_json(res, options).dump(2) << "\n";
  return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& data2_path,
                 const std::string& method, const std::vector<std::string>& raw_opts,
                 const std::string& out_dir) {
  using namespace ellipstat;
  std::map<std::string, double> options = parse_options(raw_opts);
  auto opt = [&](const std::string& key, double fallback) {
    auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
  };
  DataMatrix data = read_csv(data_path);
  const Eigen::Index n = data.rows(), p = data.cols();

  json diag;
  diag["method"] = method;
  std::map<std::string, Matrix> outputs;

  if (method == "spatial_median") {
    SpatialMedian med = spatial_median(data);
    outputs["theta"] = med.theta;
    diag["iterations"] = med.iterations;
    diag["residual"] = med.residual;
    diag["converged"] = med.converged;
  } else if (method == "scaled_spatial_median" ||
             method == "weighted_spatial_median") {
    LocationScale ls = (method == "scaled_spatial_median")
                           ? scaled_spatial_median(data)
                           : weighted_spatial_median(data, opt("m", 0.0));
    outputs["theta"] = ls.theta;
    outputs["diag_scale"] = ls.diag_scale;
    diag["iterations"] = ls.iterations;
    diag["location_residual"] = ls.location_residual;
    diag["scale_residual"] = ls.scale_residual;
    diag["converged"] = ls.converged;
  } else if (method == "sscm") {
    SpatialMedian med = spatial_median(data);
    SSCMEstimate est = sscm(data, med.theta);
    outputs["matrix"] = est.matrix;
    outputs["center"] = est.center_used;
    diag["trace"] = est.matrix.trace();
  } else if (method == "gsscm") {
    SpatialMedian med = spatial_median(data);
    const int fam = static_cast<int>(opt("family", 0.0));
    static const char* names[] = {"winsor", "quad_winsor", "ball",
                                  "shell",  "lr",          "none"};
    if (fam < 0 || fam > 5)
      throw ConfigError("family option must be an index in 0..5");
    Matrix m = gsscm(data, med.theta, gsscm_family_from_string(names[fam]));
    outputs["matrix"] = m;
    diag["family"] = names[fam];
  } else if (method == "kendall_tau") {
    Matrix m = kendall_tau_matrix(data);
    outputs["matrix"] = m;
    diag["trace"] = m.trace();
  } else if (method == "tyler") {
    SpatialMedian med = spatial_median(data);
    ShapeEstimate est = tyler(data, med.theta);
    outputs["shape"] = est.shape;
    diag["iterations"] = est.iterations;
    diag["residual"] = est.residual;
    diag["converged"] = est.converged;
  } else if (method == "hr") {
    HREstimate est = hr_estimator(data);
    outputs["location"] = est.location;
    outputs["shape"] = est.shape.shape;
    diag["location_residual"] = est.location_residual;
    diag["shape_residual"] = est.shape_residual;
    diag["converged"] = est.converged;
  } else if (method == "hd_hr") {
    const auto h = static_cast<Eigen::Index>(opt("h", 1.0));
    Matrix pilot;
    if (opt("pilot_lambda", 0.0) > 0.0) {
      SpatialMedian med = spatial_median(data);
      pilot = sclime(static_cast<double>(p) * sscm(data, med.theta).matrix,
                     opt("pilot_lambda", 0.0));
      Matrix sym = 0.5 * (pilot + pilot.transpose());
      EigenSystem es = sym_eigen(sym);
      if (es.eigenvalues.minCoeff() <= 0.0)
        sym += (1e-6 - es.eigenvalues.minCoeff()) * Matrix::Identity(p, p);
      pilot = sym;
    } else {
      pilot = Matrix::Identity(p, p);
    }
    HREstimate est = hd_hr(data, pilot, h);
    outputs["location"] = est.location;
    outputs["shape"] = est.shape.shape;
    outputs["inverse_shape"] = *est.inverse_shape;
    outputs["scatter"] = *est.scatter;
    diag["h"] = static_cast<long>(h);
  } else if (method == "trace") {
    diag["trace_estimate"] = trace_estimator(data);
  } else if (method == "trace_r2") {
    LocationScale ls = scaled_spatial_median(data);
    diag["tr_r2_estimate"] = (opt("exact", 0.0) != 0.0)
                                 ? trace_r2_estimator_exact(data)
                                 : trace_r2_estimator(data, ls);
  } else if (method == "sclime" || method == "sglasso") {
    SpatialMedian med = spatial_median(data);
    Matrix g = static_cast<double>(p) * sscm(data, med.theta).matrix;
    double lambda = opt("lambda", 0.0);
    if (lambda <= 0.0) lambda = sclime_default_lambda(n, p, opt("c", 2.0));
    Matrix v = (method == "sclime") ? sclime(g, lambda) : sglasso(g, lambda);
    outputs["inverse_shape"] = v;
    diag["lambda"] = lambda;
    if (options.count("tau")) {
      Eigen::MatrixXi pattern = threshold_support(v, options.at("tau"));
      outputs["support"] = pattern.cast<double>();
    }
  } else if (method == "sslda") {
    if (data2_path.empty())
      throw ConfigError("sslda needs --data2 for the second class");
    DataMatrix d2 = read_csv(data2_path);
    std::optional<double> lambda;
    if (options.count("lambda")) lambda = options.at("lambda");
    LDAModel model = sslda_fit(data, d2, lambda, opt("c", 2.0));
    outputs["gamma"] = model.gamma;
    outputs["midpoint"] = model.midpoint;
    diag["lambda_used"] = model.lambda_used;
    diag["support_size"] = static_cast<long>(model.support.size());
  } else if (method == "spca" || method == "gspca") {
    const auto r = static_cast<Eigen::Index>(opt("r", 1.0));
    SubspaceEstimate est;
    if (method == "spca") {
      est = spca_subspace(data, r);
    } else {
      const int fam = static_cast<int>(opt("family", 0.0));
      static const char* names[] = {"winsor", "quad_winsor", "ball",
                                    "shell",  "lr",          "none"};
      if (fam < 0 || fam > 5)
        throw ConfigError("family option must be an index in 0..5");
      est = gspca_subspace(data, gsscm_family_from_string(names[fam]), r);
    }
    outputs["basis"] = est.basis;
    outputs["eigenvalues"] = est.eigenvalues;
    diag["source"] = est.source;
    diag["degenerate_gap"] = est.degenerate_gap;
  } else if (method == "sspca") {
    SparseDirection dir =
        sspca_leading(data, static_cast<Eigen::Index>(opt("s", 1.0)));
    outputs["vector"] = dir.vector;
    diag["objective"] = dir.objective;
    diag["support_size"] = static_cast<long>(dir.support_size);
    diag["iterations"] = dir.iterations;
    diag["converged"] = dir.converged;
  } else if (method == "factor_number") {
    const std::string source = opt("kendall", 0.0) != 0.0 ? "kendall" : "sscm";
    FactorNumber fn = factor_number_eigenratio(
        data, static_cast<Eigen::Index>(opt("kmax", 1.0)), source);
    diag["k"] = fn.k;
    diag["source"] = source;
    diag["eigenvalue_floored"] = fn.eigenvalue_floored;
  } else if (method == "kendall_factor") {
    SubspaceEstimate est =
        kendall_factor(data, static_cast<Eigen::Index>(opt("k", 1.0)));
    outputs["basis"] = est.basis;
    outputs["eigenvalues"] = est.eigenvalues;
  } else if (method == "sscca") {
    if (data2_path.empty())
      throw ConfigError("sscca needs --data2 for the second block");
    DataMatrix d2 = read_csv(data2_path);
    CCAPair pair = sscca_fit(data, d2, opt("cx", 2.0), opt("cy", 2.0));
    outputs["u"] = pair.u;
    outputs["v"] = pair.v;
    diag["rho"] = pair.rho;
    diag["iterations"] = pair.iterations;
    diag["converged"] = pair.converged;
    diag["ill_conditioned"] = pair.ill_conditioned;
  } else {
    throw ConfigError(
        "unknown estimator '" + method +
        "'; available: spatial_median scaled_spatial_median "
        "weighted_spatial_median sscm gsscm kendall_tau tyler hr hd_hr trace "
        "trace_r2 sclime sglasso sslda spca gspca sspca factor_number "
        "kendall_factor sscca");
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (const auto& [name, value] : outputs)
      write_csv((fs::path(out_dir) / (method + "_" + name + ".csv")).string(),
                value);
    write_text(fs::path(out_dir) / (method + "_diagnostics.json"),
               diag.dump(2) + "\n");
  } else {
    for (const auto& [name, value] : outputs) {
      if (value.size() <= 64) {
        json arr = json::array();
        for (Eigen::Index i = 0; i < value.rows(); ++i)
          for (Eigen::Index j = 0; j < value.cols(); ++j)
            arr.push_back(value(i, j));
        diag[name] = arr;
      } else {
        diag[name] = "(" + std::to_string(value.rows()) + "x" +
                     std::to_string(value.cols()) + ", use --out to export)";
      }
    }
  }
  std::cout << diag.dump(2) << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir) {
  const fs::path json_path = fs::path(in_dir) / "results.json";
  std::ifstream in(json_path);
  if (!in)
    throw ellipstat::ConfigError("cannot open '" + json_path.string() +
                                 "'; run simulate first");
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ellipstat::ConfigError(std::string("results.json is corrupt: ") +
                                 e.what());
  }

  ellipstat::SimulationOutput out;
  out.digest = root.value("digest", "");
  for (const json& row : root["results"]) {
    ellipstat::ResultRow r;
    r.test = row.value("test", "");
    r.scenario_digest = out.digest;
    r.rejection_rate = row.value("rejection_rate", 0.0);
    r.std_error = row.value("std_error", 0.0);
    r.mean_statistic = row.value("mean_statistic", 0.0);
    r.reps_completed = row.value("reps_completed", 0);
    r.reps_failed = row.value("reps_failed", 0);
    out.rows.push_back(std::move(r));
  }
  write_text(fs::path(in_dir) / "report.md", ellipstat::results_to_markdown(out));
  std::cout << "wrote " << (fs::path(in_dir) / "report.md").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Robust high-dimensional inference under elliptical symmetry: "
      "sign/rank tests, robust scatter and sparse inverse-shape estimation, "
      "sign-based classification and latent-structure estimation."};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_path, data2_path, method, in_dir;
  std::vector<std::string> options;
  int threads = 0;

  CLI::App* sim = app.add_subcommand("simulate", "Run a declarative Monte Carlo scenario");
  sim->add_option("--config", config_path, "JSON scenario file")->required();
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--threads", threads, "worker threads (overrides config)");

  CLI::App* tst = app.add_subcommand("test", "Run one hypothesis test on CSV data");
  tst->add_option("--data", data_path, "CSV sample")->required();
  tst->add_option("--data2", data2_path, "second CSV sample (two-sample tests)");
  tst->add_option("--method", method, "test name")->required();
  tst->add_option("--options", options, "k=v test options");

  CLI::App* est = app.add_subcommand("estimate", "Run one estimator on CSV data");
  est->add_option("--data", data_path, "CSV sample")->required();
  est->add_option("--data2", data2_path, "second CSV sample (sslda, sscca)");
  est->add_option("--method", method, "estimator name")->required();
  est->add_option("--options", options, "k=v estimator options");
  est->add_option("--out", out_dir, "directory for CSV/JSON outputs");

  CLI::App* rep = app.add_subcommand("report", "Render results.json as Markdown");
  rep->add_option("--in", in_dir, "directory containing results.json")->required();

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, threads);
    if (tst->parsed()) return cmd_test(data_path, data2_path, method, options);
    if (est->parsed())
      return cmd_estimate(data_path, data2_path, method, options, out_dir);
    if (rep->parsed()) return cmd_report(in_dir);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ellipstat::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ellipstat::StatError& e) {
    nlohmann::json err;
    err["error"] = ellipstat::error_code_name(e.code());
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
