#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fkcap/capacity.hpp"
#include "fkcap/fkdet.hpp"
#include "fkcap/io.hpp"
#include "fkcap/randmat.hpp"
#include "fkcap/semicirc.hpp"

namespace {

using fkcap::json;

// ---- config file plumbing --------------------------------------------------
// A --config JSON object overrides flag defaults; flags given on the command
// line still win.

struct ConfigKey {
  std::string name;
  CLI::Option* opt;  // skip the override when this was set explicitly
  std::function<void(const json&)> apply;
};

template <typename T>
ConfigKey config_key(const std::string& name, CLI::Option* opt, T& target) {
  return {name, opt, [name, &target](const json& v) {
            try {
              target = v.get<T>();
            } catch (const nlohmann::json::exception&) {
              throw fkcap::ParseError("config." + name + ": wrong type");
            }
          }};
}

void apply_config(const std::string& path, const std::string& command,
                  std::vector<ConfigKey>& keys) {
  if (path.empty()) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fkcap::ParseError(path + ": cannot open file");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw fkcap::ParseError(path + ": " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw fkcap::ParseError(path + ": config must be a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    bool known = false;
    for (auto& k : keys) {
      if (it.key() != k.name) continue;
      known = true;
      if (k.opt == nullptr || k.opt->count() == 0) k.apply(it.value());
      break;
    }
    if (!known)
      throw fkcap::ParseError("config: unknown key \"" + it.key() + "\" for command " +
                              command);
  }
}

std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (...) {
      throw fkcap::ParseError("eps-schedule: not a number: \"" + tok + "\"");
    }
    if (pos != tok.size())
      throw fkcap::ParseError("eps-schedule: trailing characters in \"" + tok + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw fkcap::ParseError("eps-schedule: empty list");
  return out;
}

// ---- JSON report fragments ---------------------------------------------------

json context_json(const char* command, const std::string& input,
                  const fkcap::InputDocument& doc, const fkcap::KrausTuple& eta) {
  json out;
  out["command"] = command;
  out["input"] = input;
  if (!doc.label.empty()) out["label"] = doc.label;
  out["m"] = eta.dim();
  out["terms"] = eta.terms();
  return out;
}

json capacity_report_json(const fkcap::CapacityReport& rep) {
  json j;
  j["cap_estimate"] = rep.cap_estimate;
  j["cap_upper"] = rep.cap_upper;
  j["ds_final"] = rep.ds_final;
  j["status"] = fkcap::to_string(rep.status);
  j["iterations"] = rep.iterations;
  return j;
}

json fk_result_json(const fkcap::FkResult& r) {
  json j;
  j["value"] = r.value;
  j["log_det"] = r.log_det;  // -infinity serializes as null
  j["certified"] = r.certified;
  j["atom_flag"] = r.atom_flag;
  if (r.route == fkcap::FkRoute::capacity) {
    j["capacity"] = capacity_report_json(r.capacity);
  } else {
    j["atom_mass"] = r.atom_mass;
    j["eps"] = r.eps_values;
    j["log_integrals"] = r.log_integrals;
  }
  return j;
}

void emit(const json& out) { std::cout << out.dump(2) << "\n"; }

// ---- command runners ---------------------------------------------------------

int run_cap(const std::string& input, double tol, long max_iters, bool oracle) {
  fkcap::InputDocument doc = fkcap::load_input_document(input);
  fkcap::KrausTuple eta = fkcap::to_kraus(doc);
  fkcap::CapacityReport rep = fkcap::estimate_capacity(eta, tol, max_iters);

  json out = context_json("cap", input, doc, eta);
  out["config"] = {{"tol", tol}, {"max_iters", max_iters}, {"oracle", oracle}};
  out["capacity"] = capacity_report_json(rep);
  if (oracle) {
    fkcap::BruteForceResult bf = fkcap::brute_force_capacity(eta);
    double denom = std::max(std::abs(bf.value), std::abs(rep.cap_estimate));
    json oj;
    oj["value"] = bf.value;
    oj["certified"] = bf.certified;
    oj["relative_gap"] = denom > 0.0 ? std::abs(bf.value - rep.cap_estimate) / denom : 0.0;
    out["oracle"] = oj;
  }
  emit(out);
  return 0;
}

int run_fkdet(const std::string& input, const std::string& route, double tol,
              long max_iters, const std::vector<double>& eps_schedule, int grid_points,
              int threads, bool check_corollary) {
  if (route != "capacity" && route != "spectral" && route != "both")
    throw fkcap::ParseError("route: must be capacity, spectral, or both");
  fkcap::InputDocument doc = fkcap::load_input_document(input);
  fkcap::KrausTuple eta = fkcap::to_kraus(doc);

  json out = context_json("fkdet", input, doc, eta);
  out["config"] = {{"route", route},
                   {"tol", tol},
                   {"max_iters", max_iters},
                   {"eps_schedule", eps_schedule},
                   {"grid_points", grid_points},
                   {"atom_threshold", 0.05},
                   {"threads", threads},
                   {"check_corollary", check_corollary}};

  std::optional<fkcap::FkResult> rc, rs;
  if (route != "spectral") rc = fkcap::fk_det_capacity(eta, tol, max_iters);
  if (route != "capacity") {
    fkcap::SpectralParams p;
    p.eps_schedule = eps_schedule;
    p.grid_points = grid_points;
    p.threads = threads;
    rs = fkcap::fk_det_spectral(eta, p);
  }
  if (rc) out["capacity_route"] = fk_result_json(*rc);
  if (rs) out["spectral_route"] = fk_result_json(*rs);
  if (rc && rs) {
    if (rc->value > 0.0)
      out["relative_discrepancy"] = std::abs(rs->value - rc->value) / rc->value;
    else if (rs->value == 0.0)
      out["relative_discrepancy"] = 0.0;
    else
      out["relative_discrepancy"] = nullptr;
  }
  if (check_corollary) {
    fkcap::CorollaryReport cr = fkcap::corollary_bound_check(eta);
    out["corollary"] = {{"verdict", fkcap::to_string(cr.verdict)},
                        {"checked", cr.checked},
                        {"holds", cr.holds},
                        {"value_capacity", cr.value_capacity},
                        {"value_spectral", cr.value_spectral},
                        {"threshold", cr.threshold}};
  }
  emit(out);
  return 0;
}

int run_density(const std::string& input, double eps, int grid_points, int threads,
                const std::string& csv) {
  fkcap::InputDocument doc = fkcap::load_input_document(input);
  fkcap::KrausTuple eta = fkcap::to_kraus(doc);
  fkcap::SpectralGrid grid = fkcap::density(eta, grid_points, eps, threads);
  double atom = fkcap::atom_at_zero(eta);

  json out = context_json("density", input, doc, eta);
  out["config"] = {{"eps", eps}, {"grid_points", grid_points}, {"threads", threads},
                   {"csv", csv}};
  out["summary"] = {{"mass", grid.mass},
                    {"support_radius", fkcap::support_radius(eta)},
                    {"atom_at_zero", atom},
                    {"failed_points", grid.failed_points.size()},
                    {"points", grid.energies.size()}};
  if (!csv.empty()) {
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<size_t>(grid.energies.size()));
    for (Eigen::Index i = 0; i < grid.energies.size(); ++i)
      rows.push_back({grid.energies(i), grid.density(i)});
    fkcap::write_csv(csv, {"energy", "density"}, rows);
  }
  emit(out);
  return 0;
}

int run_moments(const std::string& input, int kmax) {
  fkcap::InputDocument doc = fkcap::load_input_document(input);
  fkcap::KrausTuple eta = fkcap::to_kraus(doc);
  fkcap::MomentTable table = fkcap::moment_table(eta, kmax);

  json out = context_json("moments", input, doc, eta);
  out["config"] = {{"kmax", kmax}};
  json rows = json::array();
  for (int k = 0; k <= table.k_max; ++k) {
    double cat = fkcap::catalan(k);
    double dev = std::abs(table.moments[static_cast<size_t>(k)] - cat);
    // tiny absolute slack absorbs roundoff in an otherwise exact inequality
    bool ok = dev <= table.bounds[static_cast<size_t>(k)] * (1.0 + 1e-12) + 1e-12;
    rows.push_back({{"k", k},
                    {"moment", table.moments[static_cast<size_t>(k)]},
                    {"catalan", cat},
                    {"bound", table.bounds[static_cast<size_t>(k)]},
                    {"ok", ok}});
  }
  out["table"] = std::move(rows);
  emit(out);
  return 0;
}

int run_randmat(const std::string& input, int N, int trials, std::uint64_t seed,
                int threads, const std::string& csv) {
  fkcap::InputDocument doc = fkcap::load_input_document(input);
  fkcap::KrausTuple eta = fkcap::to_kraus(doc);
  fkcap::McConfig config;
  config.N = N;
  config.trials = trials;
  config.seed = seed;
  fkcap::McReport rep = fkcap::run_experiment(eta, config, threads);

  json out = context_json("randmat", input, doc, eta);
  out["config"] = {{"N", N}, {"trials", trials}, {"seed", seed}, {"threads", threads},
                   {"csv", csv}};
  json per = json::array();
  for (double v : rep.per_trial_logdelta) per.push_back(v);  // -inf becomes null
  out["report"] = {{"mean", rep.mean},
                   {"std_error", rep.std_error},
                   {"singular_count", rep.singular_count},
                   {"prediction", rep.prediction},
                   {"per_trial", per}};
  if (!csv.empty()) {
    std::vector<std::vector<double>> rows;
    rows.reserve(rep.per_trial_logdelta.size());
    for (size_t t = 0; t < rep.per_trial_logdelta.size(); ++t)
      rows.push_back({static_cast<double>(t), rep.per_trial_logdelta[t]});
    fkcap::write_csv(csv, {"trial", "logdelta"}, rows);
  }
  emit(out);
  return 0;
}

int run_scale(const std::string& input, const std::string& c1_path,
              const std::string& c2_path) {
  fkcap::InputDocument doc = fkcap::load_input_document(input);
  fkcap::KrausTuple eta = fkcap::to_kraus(doc);
  fkcap::cmat c1 = fkcap::cmat::Identity(eta.dim(), eta.dim());
  fkcap::cmat c2 = c1;
  if (!c1_path.empty()) c1 = fkcap::load_matrix(c1_path);
  if (!c2_path.empty()) c2 = fkcap::load_matrix(c2_path);
  fkcap::KrausTuple scaled = fkcap::scale(eta, c1, c2);
  emit(fkcap::kraus_to_json(scaled, doc.label));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Capacities, spectral densities, and Fuglede-Kadison determinants of "
      "matrix-valued semicircular operators"};
  app.require_subcommand(1);

  // cap
  auto* cap = app.add_subcommand("cap", "Estimate the capacity of a Kraus tuple");
  std::string cap_input, cap_config;
  double cap_tol = 1e-8;
  long cap_iters = -1;
  bool cap_oracle = false;
  cap->add_option("input", cap_input, "input document (JSON)")->required();
  auto* cap_tol_o = cap->add_option("--tol", cap_tol, "ds convergence tolerance");
  auto* cap_iters_o =
      cap->add_option("--max-iters", cap_iters, "iteration budget, -1 = default");
  auto* cap_oracle_o =
      cap->add_flag("--oracle", cap_oracle, "also run the direct minimizer (m <= 4)");
  cap->add_option("--config", cap_config, "JSON file overriding flag defaults");

  // fkdet
  auto* fkd = app.add_subcommand(
      "fkdet", "Fuglede-Kadison determinant of the associated semicircular operator");
  std::string fkd_input, fkd_config, fkd_route = "both";
  std::string fkd_eps_str = "1e-1,3e-2,1e-2,3e-3,1e-3";
  double fkd_tol = 1e-8;
  long fkd_iters = -1;
  int fkd_grid = 2000, fkd_threads = 0;
  bool fkd_corollary = false;
  std::vector<double> fkd_eps = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  fkd->add_option("input", fkd_input, "input document (JSON)")->required();
  auto* fkd_route_o =
      fkd->add_option("--route", fkd_route, "capacity | spectral | both");
  auto* fkd_tol_o = fkd->add_option("--tol", fkd_tol, "capacity-route ds tolerance");
  auto* fkd_iters_o =
      fkd->add_option("--max-iters", fkd_iters, "capacity iteration budget, -1 = default");
  auto* fkd_eps_o = fkd->add_option("--eps-schedule", fkd_eps_str,
                                    "comma-separated broadening schedule");
  auto* fkd_grid_o = fkd->add_option("--grid-points", fkd_grid, "density grid size");
  auto* fkd_threads_o =
      fkd->add_option("--threads", fkd_threads, "worker threads, 0 = all cores");
  auto* fkd_cor_o = fkd->add_flag("--check-corollary", fkd_corollary,
                                  "check the integral lower bound (integer tuples)");
  fkd->add_option("--config", fkd_config, "JSON file overriding flag defaults");

  // density
  auto* den = app.add_subcommand(
      "density", "Broadened spectral density of the hermitized operator");
  std::string den_input, den_config, den_csv;
  double den_eps = 1e-3;
  int den_grid = 2000, den_threads = 0;
  den->add_option("input", den_input, "input document (JSON)")->required();
  auto* den_eps_o = den->add_option("--eps", den_eps, "spectral broadening");
  auto* den_grid_o = den->add_option("--grid-points", den_grid, "grid size");
  auto* den_threads_o =
      den->add_option("--threads", den_threads, "worker threads, 0 = all cores");
  auto* den_csv_o = den->add_option("--csv", den_csv, "write energy,density rows here");
  den->add_option("--config", den_config, "JSON file overriding flag defaults");

  // moments
  auto* mom =
      app.add_subcommand("moments", "Even moments against the Catalan baseline");
  std::string mom_input, mom_config;
  int mom_kmax = 5;
  mom->add_option("input", mom_input, "input document (JSON)")->required();
  auto* mom_kmax_o = mom->add_option("--kmax", mom_kmax, "highest pairing order (<= 10)");
  mom->add_option("--config", mom_config, "JSON file overriding flag defaults");

  // randmat
  auto* rmt = app.add_subcommand("randmat",
                                 "Monte Carlo determinants of GUE block models");
  std::string rmt_input, rmt_config, rmt_csv;
  int rmt_N = 100, rmt_trials = 50, rmt_threads = 0;
  std::uint64_t rmt_seed = 1;
  rmt->add_option("input", rmt_input, "input document (JSON)")->required();
  auto* rmt_n_o = rmt->add_option("--N", rmt_N, "sample dimension");
  auto* rmt_trials_o = rmt->add_option("--trials", rmt_trials, "number of draws");
  auto* rmt_seed_o = rmt->add_option("--seed", rmt_seed, "base seed");
  auto* rmt_threads_o =
      rmt->add_option("--threads", rmt_threads, "worker threads, 0 = all cores");
  auto* rmt_csv_o = rmt->add_option("--csv", rmt_csv, "write trial,logdelta rows here");
  rmt->add_option("--config", rmt_config, "JSON file overriding flag defaults");

  // scale
  auto* scl = app.add_subcommand("scale", "Two-sided scaling of a Kraus tuple");
  std::string scl_input, scl_config, scl_c1, scl_c2;
  scl->add_option("input", scl_input, "input document (JSON)")->required();
  auto* scl_c1_o = scl->add_option("--c1", scl_c1, "left factor (JSON matrix file)");
  auto* scl_c2_o = scl->add_option("--c2", scl_c2, "right factor (JSON matrix file)");
  scl->add_option("--config", scl_config, "JSON file overriding flag defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cap->parsed()) {
      std::vector<ConfigKey> keys = {config_key("tol", cap_tol_o, cap_tol),
                                     config_key("max_iters", cap_iters_o, cap_iters),
                                     config_key("oracle", cap_oracle_o, cap_oracle)};
      apply_config(cap_config, "cap", keys);
      return run_cap(cap_input, cap_tol, cap_iters, cap_oracle);
    }
    if (fkd->parsed()) {
      std::vector<ConfigKey> keys = {
          config_key("route", fkd_route_o, fkd_route),
          config_key("tol", fkd_tol_o, fkd_tol),
          config_key("max_iters", fkd_iters_o, fkd_iters),
          config_key("eps_schedule", fkd_eps_o, fkd_eps),
          config_key("grid_points", fkd_grid_o, fkd_grid),
          config_key("threads", fkd_threads_o, fkd_threads),
          config_key("check_corollary", fkd_cor_o, fkd_corollary)};
      apply_config(fkd_config, "fkdet", keys);
      if (fkd_eps_o->count() > 0) fkd_eps = parse_schedule(fkd_eps_str);
      return run_fkdet(fkd_input, fkd_route, fkd_tol, fkd_iters, fkd_eps, fkd_grid,
                       fkd_threads, fkd_corollary);
    }
    if (den->parsed()) {
      std::vector<ConfigKey> keys = {config_key("eps", den_eps_o, den_eps),
                                     config_key("grid_points", den_grid_o, den_grid),
                                     config_key("threads", den_threads_o, den_threads),
                                     config_key("csv", den_csv_o, den_csv)};
      apply_config(den_config, "density", keys);
      return run_density(den_input, den_eps, den_grid, den_threads, den_csv);
    }
    if (mom->parsed()) {
      std::vector<ConfigKey> keys = {config_key("kmax", mom_kmax_o, mom_kmax)};
      apply_config(mom_config, "moments", keys);
      return run_moments(mom_input, mom_kmax);
    }
    if (rmt->parsed()) {
      std::vector<ConfigKey> keys = {
          config_key("N", rmt_n_o, rmt_N),
          config_key("trials", rmt_trials_o, rmt_trials),
          config_key("seed", rmt_seed_o, rmt_seed),
          config_key("threads", rmt_threads_o, rmt_threads),
          config_key("csv", rmt_csv_o, rmt_csv)};
      apply_config(rmt_config, "randmat", keys);
      return run_randmat(rmt_input, rmt_N, rmt_trials, rmt_seed, rmt_threads, rmt_csv);
    }
    if (scl->parsed()) {
      std::vector<ConfigKey> keys = {config_key("c1", scl_c1_o, scl_c1),
                                     config_key("c2", scl_c2_o, scl_c2)};
      apply_config(scl_config, "scale", keys);
      return run_scale(scl_input, scl_c1, scl_c2);
    }
  } catch (const fkcap::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fkcap::SingularError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const fkcap::ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const fkcap::DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;  // unreachable with require_subcommand(1)
}
