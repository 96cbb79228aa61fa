#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "steadytrunc/bounds.hpp"
#include "steadytrunc/io.hpp"
#include "steadytrunc/oracle.hpp"
#include "steadytrunc/parse.hpp"
#include "steadytrunc/refinement.hpp"

namespace steadytrunc {

inline constexpr const char* kVersion = "0.1.0";

enum class OracleMode { None, Analytic, Ssa };

struct RunConfig {
  std::string model_path;
  std::string out_dir;
  double epsilon = 1e-2;
  double epsilon_l = 1e-4;
  int m = 7;
  SolverMethod method = SolverMethod::Auto;
  bool bounds = false;
  OracleMode oracle = OracleMode::None;
  std::uint64_t seed = 1;
  std::string lyapunov_expr;          // optional override of the model file
  std::optional<StateVec> init_box;   // per-aggregated-axis upper bounds
  int max_levels = 0;                 // 0 = run to unit granularity
  long long max_states = 4'000'000;
  double ssa_time = 1e5;
  double ssa_burn_in = 0.1;
  int threads = 0;  // 0 = STEADYTRUNC_THREADS or hardware
  bool verbose = false;
};

struct RunOutput {
  RefineResult refine;
  json summary;
};

inline std::string solver_name(SolverMethod m) {
  switch (m) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::Dense: return "dense";
    case SolverMethod::Iterative: return "iterative";
    case SolverMethod::SparseDirect: return "sparse";
  }
  return "auto";
}

namespace detail {

inline void write_marginals(const std::string& dir, const ReactionNetwork& net,
                            const Partition& part,
                            const std::vector<double>& p) {
  for (int a = 0; a < net.num_species(); ++a) {
    // cell-granular on coarse runs: mass keyed by the cell's lower corner
    std::map<long long, double> marg;
    for (std::size_t i = 0; i < part.cells.size(); ++i)
      marg[part.cells[i].lower[a]] += p[i];
    std::ofstream out(dir + "/marginal_" + net.species[a].name + ".csv");
    out << net.species[a].name << ",probability\n";
    char buf[64];
    for (const auto& [v, q] : marg) {
      std::snprintf(buf, sizeof buf, "%.17g", q);
      out << v << "," << buf << "\n";
    }
  }
}

inline StateVec default_horizon(const ReactionNetwork& net) {
  return StateVec(net.num_species(), 1ll << 31);
}

}  // namespace detail

// Load the model, derive (or accept) the initial box, refine, solve, and
// write distribution/summary/iteration artifacts; optional oracle
// comparison and state-wise bounds.
inline RunOutput run(const RunConfig& cfg) {
  std::ifstream in(cfg.model_path);
  if (!in) throw InputError("cannot open model file: " + cfg.model_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  ReactionNetwork net = parse_model(text);

  Poly g = cfg.lyapunov_expr.empty()
               ? (net.lyapunov_g ? *net.lyapunov_g : default_lyapunov_g(net))
               : parse_polynomial(net, cfg.lyapunov_expr);

  double lyap_c = 0.0;
  StateVec box;
  if (cfg.init_box) {
    box.assign(net.num_species(), 0);
    const auto agg = net.aggregated_axes();
    if (cfg.init_box->size() != agg.size())
      throw InputError("--init-box needs one bound per aggregated species");
    for (std::size_t i = 0; i < agg.size(); ++i) box[agg[i]] = (*cfg.init_box)[i];
  } else {
    box = lyapunov_box(net, g, cfg.epsilon_l, detail::default_horizon(net),
                       &lyap_c);
  }

  RefinementConfig rc;
  rc.epsilon = cfg.epsilon;
  rc.m = cfg.m;
  rc.max_states = cfg.max_states;
  rc.method = cfg.method;
  rc.stop_after_levels = cfg.max_levels;
  rc.verbose = cfg.verbose;
  RunOutput out;
  out.refine = refine(net, box, rc);
  const RefineResult& rr = out.refine;

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  std::vector<std::string> names;
  for (const auto& s : net.species) names.push_back(s.name);
  std::vector<StateVec> rows;
  rows.reserve(rr.partition.cells.size());
  for (const auto& c : rr.partition.cells) rows.push_back(c.lower);
  write_distribution_csv(cfg.out_dir + "/distribution.csv", names, rows,
                         rr.distribution.p);
  write_iterations_csv(cfg.out_dir + "/iterations.csv", rr.reports);
  detail::write_marginals(cfg.out_dir, net, rr.partition, rr.distribution.p);

  json summary;
  summary["schema_version"] = 1;
  summary["model"] = cfg.model_path;
  summary["config"] = {{"epsilon", cfg.epsilon},
                       {"epsilon_l", cfg.epsilon_l},
                       {"init_exponent", cfg.m},
                       {"solver", solver_name(cfg.method)},
                       {"seed", cfg.seed},
                       {"bounds", cfg.bounds},
                       {"oracle", cfg.oracle == OracleMode::None
                                      ? "none"
                                      : cfg.oracle == OracleMode::Analytic
                                            ? "analytic"
                                            : "ssa"}};
  summary["iterations"] = iteration_reports_json(rr.reports);
  summary["final_size"] = rr.partition.size();
  long long width = 1;
  for (long long w : rr.partition.width) width = std::max(width, w);
  summary["final_cell_width"] = width;
  summary["reentry_scheme"] = rc.reentry_scheme;
  summary["versions"] = {{"steadytrunc", kVersion}};
  if (!cfg.init_box) {
    json jbox = json::array();
    for (int a : net.aggregated_axes()) jbox.push_back(box[a]);
    summary["lyapunov"] = {{"c", lyap_c}, {"box", jbox}};
  }

  if (cfg.oracle != OracleMode::None && rr.reached_unit) {
    StateIndex trunc = rr.truncation();
    if (cfg.oracle == OracleMode::Analytic) {
      auto rates = product_poisson_rates(net);
      if (!rates)
        throw InputError(
            "analytic oracle unavailable: model is not a product of "
            "birth-death pairs");
      summary["outside_mass"] = outside_mass_estimate(trunc, *rates);
      // reference export over a box covering the reference mass
      StateVec lo(net.num_species(), 0), hi(net.num_species(), 0);
      for (int a = 0; a < net.num_species(); ++a) {
        long long q = static_cast<long long>(
            std::ceil((*rates)[a] + 12.0 * std::sqrt((*rates)[a]) + 20.0));
        for (const auto& s : trunc.states()) q = std::max(q, s[a]);
        hi[a] = q;
      }
      double vol = 1.0;
      for (int a = 0; a < net.num_species(); ++a)
        vol *= static_cast<double>(hi[a] - lo[a] + 1);
      if (vol <= 2e7) {
        StateIndex refbox = StateIndex::box(lo, hi);
        std::vector<double> refp(refbox.size());
        for (int i = 0; i < refbox.size(); ++i)
          refp[i] = product_poisson_pmf(*rates, refbox.state(i));
        write_distribution_csv(cfg.out_dir + "/oracle.csv", names,
                               refbox.states(), refp);
      }
    } else {
      SsaConfig sc;
      sc.T = cfg.ssa_time;
      sc.burn_in_frac = cfg.ssa_burn_in;
      sc.seed = cfg.seed;
      sc.x0.assign(net.num_species(), 0);
      const auto modes = net.mode_axes();
      if (!modes.empty())
        for (std::size_t i = 0; i < modes.size(); ++i)
          sc.x0[modes[i]] = net.mode_combos.front()[i];
      OccupancyEstimate occ = ssa_occupancy(net, sc);
      summary["outside_mass"] = outside_mass_estimate(trunc, occ);
      summary["ssa"] = {{"T", sc.T},
                        {"burn_in_frac", sc.burn_in_frac},
                        {"seed", sc.seed},
                        {"jumps", occ.jumps}};
      std::vector<StateVec> ostates;
      std::vector<double> oprobs;
      ostates.reserve(occ.fraction.size());
      for (const auto& [x, f] : occ.fraction) {
        ostates.push_back(x);
        oprobs.push_back(f);
      }
      // deterministic order for the export
      std::vector<std::size_t> idx(ostates.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return ostates[a] < ostates[b];
      });
      std::vector<StateVec> ss;
      std::vector<double> pp;
      for (std::size_t i : idx) {
        ss.push_back(ostates[i]);
        pp.push_back(oprobs[i]);
      }
      write_distribution_csv(cfg.out_dir + "/oracle.csv", names, ss, pp);
    }
  }

  if (cfg.bounds && rr.reached_unit) {
    StateIndex trunc = rr.truncation();
    IntervalResult b = statewise_bounds(net, trunc, cfg.threads);
    std::ofstream bout(cfg.out_dir + "/bounds.csv");
    for (const auto& s : names) bout << s << ",";
    bout << "lower,upper\n";
    char buf[64];
    for (int i = 0; i < trunc.size(); ++i) {
      for (long long c : trunc.state(i)) bout << c << ",";
      std::snprintf(buf, sizeof buf, "%.17g", b.lower[i]);
      bout << buf << ",";
      std::snprintf(buf, sizeof buf, "%.17g", b.upper[i]);
      bout << buf << "\n";
    }
    summary["bounds"] = {{"total_width", b.total_width},
                         {"max_width", b.max_width},
                         {"targets", b.targets},
                         {"failed_targets", b.failed_targets}};
  }

  validate_against_schema(summary, json::parse(summary_schema_text()));
  std::ofstream sout(cfg.out_dir + "/summary.json");
  sout << summary.dump(2) << "\n";
  out.summary = summary;
  return out;
}

}  // namespace steadytrunc
