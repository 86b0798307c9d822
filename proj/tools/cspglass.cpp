#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cspglass/experiments.hpp"
#include "cspglass/io.hpp"
#include "cspglass/landscape.hpp"
#include "cspglass/parisi.hpp"
#include "cspglass/rng.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using cspglass::Json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Output {
  std::string out_path;
  std::string format = "csv";

  // payload to --out (or stdout), manifest alongside (or stderr)
  void emit(const std::string& csv, const Json& json_payload, const Json& manifest) const {
    const std::string body = format == "json" ? json_payload.dump(2) + "\n" : csv;
    if (out_path.empty()) {
      std::cout << body;
      std::cerr << manifest.dump() << "\n";
    } else {
      std::ofstream f(out_path);
      if (!f) throw std::invalid_argument("cannot write output file '" + out_path + "'");
      f << body;
      std::ofstream mf(out_path + ".manifest.json");
      mf << manifest.dump(2) << "\n";
    }
  }
};

Json make_manifest(const std::string& subcommand, std::uint64_t seed, const Json& params) {
  Json m;
  m["tool"] = "cspglass";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["seed"] = seed;
  m["parameters"] = params;
  return m;
}

cspglass::Predicate resolve_predicate(const std::string& family, int k,
                                      const std::string& table_path) {
  if (!table_path.empty()) return cspglass::load_predicate_file(table_path);
  auto fam = cspglass::family_from_string(family);
  if (!fam)
    throw std::invalid_argument("unknown family '" + family +
                                "' (use kXOR, kSAT, kNAE, oneInK, or --table)");
  return cspglass::builtin_predicate(*fam, k);
}

// deterministic parallel map: worker pool over row indices, results by index
template <typename F>
void parallel_rows(int rows, F&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(rows));
  if (workers <= 1) {
    for (int i = 0; i < rows; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= rows) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

int run_spectrum(const std::string& family, int k, const std::string& table_path,
                 std::uint64_t seed, const Output& output) {
  const cspglass::Predicate p = resolve_predicate(family, k, table_path);
  const cspglass::FourierSpectrum s = cspglass::walsh_transform(p);
  const cspglass::MixturePolynomial xi = cspglass::mixture_of(p);

  std::ostringstream csv;
  csv << "kind,index,value\n";
  csv << "mean,," << fmt(s.mean()) << "\n";
  for (int level = 1; level <= p.arity; ++level)
    csv << "level," << level << "," << fmt(s.level_weight(level)) << "\n";
  for (int d = 1; d <= xi.max_degree; ++d)
    if (xi.coefficient(d) > 0.0) csv << "xi," << d << "," << fmt(xi.coefficient(d)) << "\n";

  Json payload;
  payload["spectrum"] = cspglass::spectrum_to_json(s);
  payload["mixture"] = cspglass::mixture_to_json(xi);

  Json params;
  params["family"] = family;
  params["k"] = k;
  params["table"] = table_path;
  output.emit(csv.str(), payload, make_manifest("spectrum", seed, params));
  return 0;
}

int run_table1(const std::vector<std::string>& families, int k_min, int k_max, int grid_nx,
               double grid_l, int atoms, std::uint64_t seed, const Output& output) {
  struct Row {
    std::string family;
    int k = 0;
    double mean_term = 0.0, gsed = 0.0, delta = 0.0;
    bool converged = false;
    std::string error;
  };
  std::vector<Row> rows;
  for (const std::string& fam : families)
    for (int k = k_min; k <= k_max; ++k) rows.push_back({fam, k});

  parallel_rows(static_cast<int>(rows.size()), [&](int i) {
    Row& row = rows[i];
    try {
      const cspglass::Predicate p = resolve_predicate(row.family, row.k, "");
      const cspglass::MixturePolynomial xi = cspglass::mixture_of(p);
      cspglass::MinimizeOptions opts;
      opts.max_atoms = atoms;
      opts.report_grid.spatial_points = grid_nx;
      opts.report_grid.half_width = grid_l;
      opts.search_grid.spatial_points = std::max(512, grid_nx / 4);
      opts.search_grid.half_width = grid_l;
      opts.seed = cspglass::derive_seed(seed, {static_cast<std::uint64_t>(i)});
      const cspglass::MinimizeResult r = cspglass::minimize_gsed(xi, opts);
      row.mean_term = xi.mean_term;
      row.gsed = r.value;
      row.delta = r.grid_delta;
      row.converged = r.converged;
    } catch (const std::exception& e) {
      // per-row failure isolation: long sweeps must not lose completed work
      row.error = e.what();
    }
  });

  std::ostringstream csv;
  csv << "family,k,mean_term,gsed,grid_delta,converged,error\n";
  Json jrows = Json::array();
  for (const Row& row : rows) {
    csv << row.family << "," << row.k << ",";
    if (row.error.empty())
      csv << fmt(row.mean_term) << "," << fmt(row.gsed) << "," << fmt(row.delta) << ","
          << (row.converged ? 1 : 0) << ",\n";
    else
      csv << ",,,," << row.error << "\n";
    Json r;
    r["family"] = row.family;
    r["k"] = row.k;
    if (row.error.empty()) {
      r["mean_term"] = row.mean_term;
      r["gsed"] = row.gsed;
      r["grid_delta"] = row.delta;
      r["converged"] = row.converged;
    } else {
      r["error"] = row.error;
    }
    jrows.push_back(r);
  }

  Json params;
  params["families"] = families;
  params["k_min"] = k_min;
  params["k_max"] = k_max;
  params["grid_nx"] = grid_nx;
  params["grid_L"] = grid_l;
  params["atoms"] = atoms;
  Json payload;
  payload["rows"] = jrows;
  output.emit(csv.str(), payload, make_manifest("table1", seed, params));
  return 0;
}

int run_interpolate(const std::string& family, int k, const std::string& table_path,
                    std::vector<double> alphas, int n, double beta, int reps, std::uint64_t seed,
                    const Output& output) {
  const cspglass::Predicate p = resolve_predicate(family, k, table_path);
  const auto cells = cspglass::interpolation_trend(p, alphas, n, beta, reps, seed);
  std::ostringstream csv;
  csv << "alpha,mean_phi_csp,se_csp,mean_rhs,se_rhs,delta,se,reps\n";
  Json jrows = Json::array();
  for (const auto& c : cells) {
    csv << fmt(c.alpha) << "," << fmt(c.mean_lhs) << "," << fmt(c.se_lhs) << ","
        << fmt(c.mean_rhs) << "," << fmt(c.se_rhs) << "," << fmt(c.delta) << "," << fmt(c.se)
        << "," << c.reps << "\n";
    Json r;
    r["alpha"] = c.alpha;
    r["mean_phi_csp"] = c.mean_lhs;
    r["se_csp"] = c.se_lhs;
    r["mean_rhs"] = c.mean_rhs;
    r["se_rhs"] = c.se_rhs;
    r["delta"] = c.delta;
    r["se"] = c.se;
    r["reps"] = c.reps;
    jrows.push_back(r);
  }
  Json params;
  params["family"] = family;
  params["k"] = k;
  params["alpha"] = alphas;
  params["n"] = n;
  params["beta"] = beta;
  params["reps"] = reps;
  Json payload;
  payload["rows"] = jrows;
  output.emit(csv.str(), payload, make_manifest("interpolate", seed, params));
  return 0;
}

int run_vmax(const std::string& family, int k, const std::string& table_path, double alpha, int n,
             int reps, std::uint64_t seed, const Output& output) {
  const cspglass::Predicate p = resolve_predicate(family, k, table_path);
  const auto samples = cspglass::optimal_value_samples(p, alpha, n, reps, seed);
  std::ostringstream csv;
  csv << "kind,rep,value\n";
  Json jrows = Json::array();
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    csv << "sample," << i << "," << fmt(samples.values[i]) << "\n";
    jrows.push_back(samples.values[i]);
  }
  csv << "mean,," << fmt(samples.mean) << "\n";
  csv << "stderr,," << fmt(samples.se) << "\n";
  Json params;
  params["family"] = family;
  params["k"] = k;
  params["alpha"] = alpha;
  params["n"] = n;
  params["reps"] = reps;
  Json payload;
  payload["values"] = jrows;
  payload["mean"] = samples.mean;
  payload["stderr"] = samples.se;
  output.emit(csv.str(), payload, make_manifest("vmax", seed, params));
  return 0;
}

int run_chi(const std::string& family, int k, const std::string& table_path, double alpha, int n,
            std::vector<double> t_grid, int reps, int sweeps, std::uint64_t seed,
            const Output& output) {
  const cspglass::Predicate p = resolve_predicate(family, k, table_path);
  const cspglass::CspModel model(cspglass::PredicateDistribution(p), alpha, n,
                                 cspglass::CountMode::Poisson);
  cspglass::AnnealSchedule schedule;
  schedule.sweeps = sweeps;
  const cspglass::CspAlgorithm algorithm = cspglass::make_debiased(
      cspglass::make_annealer(schedule, cspglass::derive_seed(seed, {0xa16})));
  const auto curve = cspglass::chi_curve(model, algorithm, t_grid, reps, seed);

  std::ostringstream csv;
  csv << "t,chi,stderr,reps\n";
  Json jrows = Json::array();
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    csv << fmt(curve.t[i]) << "," << fmt(curve.chi[i]) << "," << fmt(curve.stderr_chi[i]) << ","
        << curve.replicates << "\n";
    Json r;
    r["t"] = curve.t[i];
    r["chi"] = curve.chi[i];
    r["stderr"] = curve.stderr_chi[i];
    jrows.push_back(r);
  }
  Json params;
  params["family"] = family;
  params["k"] = k;
  params["alpha"] = alpha;
  params["n"] = n;
  params["t"] = t_grid;
  params["reps"] = reps;
  params["sweeps"] = sweeps;
  Json payload;
  payload["rows"] = jrows;
  output.emit(csv.str(), payload, make_manifest("chi", seed, params));
  return 0;
}

int run_ogp(const std::string& family, int k, const std::string& table_path, double alpha, int n,
            double t, std::vector<double> thresholds, int bins, const std::string& mode,
            const std::string& model_kind, std::uint64_t seed, const Output& output) {
  const cspglass::Predicate p = resolve_predicate(family, k, table_path);
  const cspglass::OgpMode ogp_mode =
      mode == "each" ? cspglass::OgpMode::Componentwise : cspglass::OgpMode::Average;

  cspglass::OgpScan scan;
  if (model_kind == "sg") {
    const cspglass::MixturePolynomial xi = cspglass::mixture_of(p);
    const cspglass::CoupledSpec spec({{1, 1, 0}, {1, 0, 1}}, {t, 1.0 - t, 1.0 - t});
    const cspglass::CoupledSpinGlass coupled =
        cspglass::sample_coupled_spin_glass(spec, xi, n, seed);
    cspglass::EnergyOracle oracle(n, 2);
    for (int i = 0; i < 2; ++i)
      for (int h = 0; h < spec.hidden(); ++h)
        if (spec.a[i][h]) oracle.add(coupled.hidden[h], i);
    scan = cspglass::ogp_scan(oracle, thresholds, bins, ogp_mode);
  } else {
    const cspglass::CspModel model(cspglass::PredicateDistribution(p), alpha, n,
                                   cspglass::CountMode::Poisson);
    const auto [first, second] = cspglass::t_correlated_pair(model, t, seed);
    const cspglass::EnergyOracle oracle = cspglass::EnergyOracle::pair(first, second);
    scan = cspglass::ogp_scan(oracle, thresholds, bins, ogp_mode);
  }

  std::ostringstream csv;
  csv << "threshold,bin_lo,bin_hi,count,tuples\n";
  Json jrows = Json::array();
  for (const auto& h : scan.histograms) {
    for (std::size_t b = 0; b + 1 < scan.bin_edges.size(); ++b) {
      csv << fmt(h.threshold) << "," << fmt(scan.bin_edges[b]) << "," << fmt(scan.bin_edges[b + 1])
          << "," << h.counts[b] << "," << h.tuples << "\n";
      Json r;
      r["threshold"] = h.threshold;
      r["bin_lo"] = scan.bin_edges[b];
      r["bin_hi"] = scan.bin_edges[b + 1];
      r["count"] = h.counts[b];
      r["tuples"] = h.tuples;
      jrows.push_back(r);
    }
  }
  Json params;
  params["family"] = family;
  params["k"] = k;
  params["alpha"] = alpha;
  params["n"] = n;
  params["t"] = t;
  params["thresholds"] = thresholds;
  params["bins"] = bins;
  params["mode"] = mode;
  params["model"] = model_kind;
  Json payload;
  payload["rows"] = jrows;
  output.emit(csv.str(), payload, make_manifest("ogp", seed, params));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-CSP ↔ mean-field spin glass toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // shared option state
  std::string family = "kXOR", table_path, mode = "avg", model_kind = "csp";
  std::vector<std::string> families = {"oneInK", "kNAE", "kSAT", "kXOR"};
  int k = 2, n = 16, k_min = 2, k_max = 5, reps = 50, bins = 8, sweeps = 60;
  int grid_nx = 1 << 12, atoms = 8;
  double alpha = 4.0, beta = 1.0, t_scalar = 0.5, grid_l = 0.0;
  std::vector<double> alphas = {4, 16, 64}, t_grid = {0, 0.25, 0.5, 0.75, 1},
                      thresholds = {0.0};
  std::uint64_t seed = 1;
  Output output;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master seed (bit-identical reruns)");
    cmd->add_option("--out", output.out_path, "output file (manifest written alongside)");
    cmd->add_option("--format", output.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_predicate = [&](CLI::App* cmd) {
    cmd->add_option("--family", family, "kXOR | kSAT | kNAE | oneInK");
    cmd->add_option("--k", k, "predicate arity");
    cmd->add_option("--table", table_path, "predicate JSON file");
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "Fourier spectrum and mixture of a predicate");
  add_predicate(spectrum);
  add_common(spectrum);

  CLI::App* table1 = app.add_subcommand("table1", "GSED for the builtin families (one row per family,k)");
  table1->add_option("--families", families, "families to include")->delimiter(',');
  table1->add_option("--kmin", k_min, "smallest arity");
  table1->add_option("--kmax", k_max, "largest arity");
  table1->add_option("--grid-nx", grid_nx, "spatial grid intervals");
  table1->add_option("--grid-L", grid_l, "grid half-width (0 = auto)");
  table1->add_option("--atoms", atoms, "max atoms in ζ");
  add_common(table1);

  CLI::App* interpolate = app.add_subcommand("interpolate", "free-energy interpolation trend across α");
  add_predicate(interpolate);
  interpolate->add_option("--alpha", alphas, "clause densities")->delimiter(',');
  interpolate->add_option("--n", n, "variables");
  interpolate->add_option("--beta", beta, "inverse temperature");
  interpolate->add_option("--reps", reps, "instances per cell");
  add_common(interpolate);

  CLI::App* vmax = app.add_subcommand("vmax", "exact optimal values of sampled instances");
  add_predicate(vmax);
  vmax->add_option("--alpha", alpha, "clause density");
  vmax->add_option("--n", n, "variables");
  vmax->add_option("--reps", reps, "instances");
  add_common(vmax);

  CLI::App* chi = app.add_subcommand("chi", "correlation curve of the debiased annealer");
  add_predicate(chi);
  chi->add_option("--alpha", alpha, "clause density");
  chi->add_option("--n", n, "variables");
  chi->add_option("--t", t_grid, "correlation grid")->delimiter(',');
  chi->add_option("--reps", reps, "pairs per t");
  chi->add_option("--sweeps", sweeps, "annealer sweeps");
  add_common(chi);

  CLI::App* ogp = app.add_subcommand("ogp", "overlap histograms above value thresholds");
  add_predicate(ogp);
  ogp->add_option("--alpha", alpha, "clause density (csp model)");
  ogp->add_option("--n", n, "variables");
  ogp->add_option("--t", t_scalar, "pair coupling");
  ogp->add_option("--thresholds", thresholds, "energy-density thresholds")->delimiter(',');
  ogp->add_option("--bins", bins, "overlap bins");
  ogp->add_option("--mode", mode, "avg or each")->check(CLI::IsMember({"avg", "each"}));
  ogp->add_option("--model", model_kind, "csp or sg")->check(CLI::IsMember({"csp", "sg"}));
  add_common(ogp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (spectrum->parsed()) return run_spectrum(family, k, table_path, seed, output);
    if (table1->parsed())
      return run_table1(families, k_min, k_max, grid_nx, grid_l, atoms, seed, output);
    if (interpolate->parsed())
      return run_interpolate(family, k, table_path, alphas, n, beta, reps, seed, output);
    if (vmax->parsed()) return run_vmax(family, k, table_path, alpha, n, reps, seed, output);
    if (chi->parsed())
      return run_chi(family, k, table_path, alpha, n, t_grid, reps, sweeps, seed, output);
    if (ogp->parsed())
      return run_ogp(family, k, table_path, alpha, n, t_scalar, thresholds, bins, mode, model_kind,
                     seed, output);
  } catch (const cspglass::ResourceLimitError& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return 3;
  } catch (const cspglass::GridError& e) {
    std::cerr << "grid diagnostic: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
