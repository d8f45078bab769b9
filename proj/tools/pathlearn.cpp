// pathlearn: experiment driver. Every subcommand writes CSV files into --out,
// each with a .json sidecar holding the full configuration and seed.
//
// Exit codes: 0 ok, 1 configuration or usage error, 2 acceptance failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "acceptance/suite.hpp"
#include "config.hpp"
#include "pathlearn/baselines.hpp"
#include "pathlearn/irm.hpp"
#include "pathlearn/multipath.hpp"
#include "pathlearn/qlearn.hpp"
#include "pathlearn/sim.hpp"
#include "reproduce.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pathlearn;
using cli::ExperimentConfig;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Run {
  ExperimentConfig cfg;
  fs::path out;
  std::string command;

  json metadata(const std::string& file) const {
    json cfg_json = json::object();
    std::istringstream in(cli::render(cfg));
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      cfg_json[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return {{"file", file}, {"command", command}, {"seed", cfg.seed}, {"version", kVersion}, {"config", cfg_json}};
  }

  void write(const std::string& name, const std::string& text, json extra = json::object()) const {
    fs::create_directories(out);
    std::ofstream(out / name, std::ios::binary) << text;
    json meta = metadata(name);
    for (auto& [k, v] : extra.items()) meta[k] = v;
    std::ofstream(out / (fs::path(name).stem().string() + ".json"), std::ios::binary) << meta.dump(2) << '\n';
    std::cout << "wrote " << (out / name).string() << '\n';
  }
};

std::string csv_of(auto&& writer) {
  std::ostringstream o;
  writer(o);
  return o.str();
}

PolicyTable belief_policy_table(const std::string& source, const ModelParams& m, const BeliefGrid& g, double tol) {
  if (source == "optimal") return extract_policy(solve_value_function(m, g, tol).value, m);
  const auto t = myopic_threshold(m);
  PolicyTable p = PolicyTable::constant(g, Action::P1);
  for (std::size_t i = 0; i < g.size(); ++i) p.actions[i] = policy_myopic(g.node(i), t);
  return p;
}

std::string qtable_csv(const QTable& q, const std::vector<double>* mass) {
  std::ostringstream o;
  o.precision(17);
  o << "window,label,q_p1,q_p2,visits_p1,visits_p2,greedy,stationary_mass\n";
  for (std::size_t w = 0; w < q.windows(); ++w) {
    o << w << ',' << ObservationWindow(q.K, w).str() << ',' << q.at(w, Action::P1) << ',' << q.at(w, Action::P2)
      << ',' << q.visits[2 * w] << ',' << q.visits[2 * w + 1] << ',' << to_string(q.greedy(w)) << ',';
    if (mass) o << (*mass)[w];
    o << '\n';
  }
  return o.str();
}

// ---- subcommands ----------------------------------------------------------

int cmd_solve(const Run& r) {
  const auto m = r.cfg.model();
  const auto res = solve_value_function(m, BeliefGrid{r.cfg.grid_n}, r.cfg.tol);
  const auto pol = extract_policy(res.value, m);
  const auto shape = verify_shape(res.value);
  const auto thr = find_threshold(pol);
  json extra = {{"iterations", res.iterations},
                {"last_change", res.last_change},
                {"threshold", thr ? json(*thr) : json(nullptr)},
                {"monotonicity_violation", shape.monotonicity_violation},
                {"concavity_violation", shape.concavity_violation},
                {"shape_ok", shape.ok(1e-6 * m.c())}};
  r.write("value_policy.csv", csv_of([&](std::ostream& o) { write_value_policy_csv(o, res.value, m); }), extra);
  std::cout << "iterations " << res.iterations << ", V(x0) " << res.value(r.cfg.x0) << '\n';
  return 0;
}

int cmd_evaluate(const Run& r) {
  const auto m = r.cfg.model();
  const BeliefGrid g(r.cfg.grid_n);
  const double x0 = r.cfg.x0;
  const std::size_t T = r.cfg.horizon > 0 ? r.cfg.horizon : default_horizon(m);
  std::ostringstream o;
  o.precision(17);
  o << "policy,x0,value,sim_mean,sim_halfwidth_3sigma,truncation_bound\n";
  auto row = [&](const std::string& name, double value, const BeliefPolicy& pol, std::uint64_t seed) {
    const auto est = estimate_discounted_cost(pol, m, x0, r.cfg.runs, T, seed);
    o << name << ',' << x0 << ',' << value << ',' << est.mean << ',' << est.halfwidth_3sigma << ','
      << est.truncation_bound << '\n';
  };
  const auto V = solve_value_function(m, g, r.cfg.tol).value;
  const auto opt = extract_policy(V, m);
  row("optimal", optimal_value_at(x0, V, m), [&](double x) { return opt(x); }, splitmix64(r.cfg.seed + 1));
  if (m.c_h() > m.c_l()) {
    const auto t = myopic_threshold(m);
    auto pol = [t](double x) { return policy_myopic(x, t); };
    row("myopic", policy_value_at(x0, value_myopic(m, g, r.cfg.tol).value, m, pol), pol, splitmix64(r.cfg.seed + 2));
  }
  const Action a = policy_no_info(m);
  row("no_info", value_no_info(x0, m), [a](double) { return a; }, splitmix64(r.cfg.seed + 3));
  const auto wpol = policy_from_q(asymptotic_q(m, r.cfg.K).table);
  o << "qlearn_K" << r.cfg.K << ',' << x0 << ',' << evaluate_window_policy(wpol, m, x0, g, r.cfg.tol) << ",,,\n";
  r.write("evaluate.csv", o.str(), {{"horizon", T}});
  return 0;
}

int cmd_poa(const Run& r) {
  const auto m = r.cfg.model();
  std::vector<repro::PoARow> rows;
  double best = 0.0, worst_excess = -std::numeric_limits<double>::infinity();
  for (const auto& inst : repro::random_instances(r.cfg.poa_instances, r.cfg.seed)) {
    rows.push_back(repro::poa_instance(inst, r.cfg.grid_n));
    best = std::max(best, rows.back().ratio);
    worst_excess = std::max(worst_excess, rows.back().ratio - 1.0 / (1.0 - inst.beta()));
  }
  json extra = {{"random_instances", r.cfg.poa_instances},
                {"random_max_ratio", best},
                {"random_max_excess_over_bound", worst_excess}};
  try {
    const auto w = repro::poa_worst_myopic(m.beta(), r.cfg.poa_eps, r.cfg.poa_q, m.c_m());
    rows.push_back(w);
    extra["myopic_worst_case"] = {{"ratio", w.ratio}, {"x0", w.x}, {"target", 1.0 / (1.0 - m.beta())}};
  } catch (const std::invalid_argument& e) {
    extra["myopic_worst_case"] = {{"error", e.what()}};
  }
  try {
    const auto w = repro::poa_worst_no_info(m.beta(), r.cfg.poa_q, m.c_m());
    rows.push_back(w);
    extra["no_info_worst_case"] = {{"ratio", w.ratio}, {"x0", w.x}};
  } catch (const std::invalid_argument& e) {
    extra["no_info_worst_case"] = {{"error", e.what()}};
  }
  r.write("poa.csv", repro::poa_csv(rows), extra);
  std::cout << extra.dump(2) << '\n';
  return 0;
}

int cmd_irm_audit(const Run& r) {
  const auto m = r.cfg.model();
  ICReport rep;
  json extra;
  if (r.cfg.irm_policy.rfind("qlearn:", 0) == 0) {
    const int K = std::stoi(r.cfg.irm_policy.substr(7));
    const auto pol = policy_from_q(asymptotic_q(m, K).table);
    rep = ic_check(pol, stationary_window_distribution(pol, m), m);
    extra = {{"method", "exact window chain"}};
  } else {
    const BeliefGrid g(r.cfg.grid_n);
    const auto pol = belief_policy_table(r.cfg.irm_policy, m, g, r.cfg.tol);
    StationarySimConfig sc{r.cfg.burn_in, r.cfg.samples, r.cfg.batches, r.cfg.seed};
    rep = ic_audit(pol, stationary_belief_distribution(pol, m, sc), m);
    extra = {{"method", "stationary simulation, batch means"}};
  }
  extra["policy"] = r.cfg.irm_policy;
  extra["incentive_compatible"] = rep.incentive_compatible();
  extra["report"] = json::parse(to_json(rep));
  r.write("irm_audit.csv", std::string(ic_csv_header()) + "\n" + to_csv_row(rep) + "\n", extra);
  std::cout << to_json(rep) << '\n';
  return 0;
}

int cmd_qlearn_online(const Run& r) {
  const auto m = r.cfg.model();
  const auto q = qlearning_online(m, r.cfg.K, LearningSchedule{r.cfg.omega}, Exploration{r.cfg.epsilon},
                                  r.cfg.epochs, r.cfg.seed);
  r.write("qtable_online.csv", qtable_csv(q, nullptr), {{"epochs", r.cfg.epochs}});
  return 0;
}

int cmd_qlearn_asymptotic(const Run& r) {
  const auto m = r.cfg.model();
  const auto res = asymptotic_q(m, r.cfg.K);
  const auto pol = policy_from_q(res.table);
  const auto d = stationary_window_distribution(pol, m);
  const auto ic = ic_check(pol, d, m);
  r.write("qtable_asymptotic.csv", qtable_csv(res.table, &d.window_mass),
          {{"iterations", res.iterations},
           {"residual", res.residual},
           {"incentive_compatible", ic.incentive_compatible()},
           {"ic", json::parse(to_json(ic))}});
  return 0;
}

int cmd_ic_scan(const Run& r) {
  const auto axis = parse_scan_axis(r.cfg.axis);
  const auto rows = ic_regime_scan(r.cfg.model(), axis, axis_values(r.cfg.lo, r.cfg.hi, r.cfg.step), r.cfg.k_min,
                                   r.cfg.k_max);
  json counts = json::object();
  for (int K = r.cfg.k_min; K <= r.cfg.k_max; ++K) {
    std::size_t n = 0;
    for (const auto& row : rows) n += row.K == K && row.non_ic();
    counts[std::to_string(K)] = n;
  }
  r.write("ic_scan.csv", csv_of([&](std::ostream& o) { write_regime_csv(o, rows); }), {{"non_ic_count_by_K", counts}});
  return 0;
}

int cmd_multipath_solve(const Run& r) {
  const auto m = r.cfg.model();
  const auto d = repro::fig4(m, r.cfg.grid2d_n, r.cfg.tol);
  r.write("policy_map.csv", repro::fig4_csv(d),
          {{"iterations", d.solution.iterations}, {"symmetry_residual", d.solution.value.symmetry_residual()}});
  return 0;
}

int report(const Run& r, const acceptance::CriterionResult& c, const acceptance::FileBundle& files) {
  for (const auto& [name, text] : files) r.write(name, text, {{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  return c.passed ? 0 : 2;
}

int cmd_reproduce(const Run& r, const std::string& name) {
  repro::check_figure_name(name);
  acceptance::FileBundle files;
  if (name == "fig2") {
    const auto c = acceptance::fig2_reproduction(files);
    return report(r, c, files);
  }
  if (name == "fig4") {
    const auto c = acceptance::fig4_reproduction(files);
    return report(r, c, files);
  }
  if (name == "table1") {
    const auto c = acceptance::table1_reproduction(files);
    return report(r, c, files);
  }
  // One Fig 3 panel: the IC regimes on its axis for K = 1..6.
  const auto setup = repro::fig3_setup(name);
  const auto d = repro::fig3(setup);
  const bool shrink = d.non_ic.at(4) <= d.non_ic.at(1), empty = d.non_ic.at(6) == 0;
  std::string detail = "non-IC K1..6=";
  for (int K = 1; K <= 6; ++K) detail += (K > 1 ? "," : "") + std::to_string(d.non_ic.at(K));
  acceptance::CriterionResult c{10, name + "_ic_regimes", shrink && empty, detail};
  files[name + ".csv"] = repro::fig3_csv(d);
  return report(r, c, files);
}

int cmd_verify(const Run& r) {
  const auto res = acceptance::run_suite(r.cfg.seed, &std::cerr);
  fs::create_directories(r.out);
  for (const auto& [name, text] : res.files) r.write(name, text);
  for (const auto& c : res.results) std::cout << (c.passed ? "PASS " : "FAIL ") << c.id << ' ' << c.name << ": " << c.detail << '\n';
  return res.all_passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recommendation platforms with hidden path states: solvers, learners and audits"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "key=value configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "overrides sim.seed");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  std::string figure;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "value iteration, policy, shape report"},
      {"evaluate", "solver values against Monte Carlo for each platform"},
      {"poa", "price-of-anarchy sweep and worst-case instances"},
      {"irm-audit", "incentive audit of the configured policy"},
      {"qlearn-online", "online Q-learning on observation windows"},
      {"qlearn-asymptotic", "asymptotic Q fixed point and its window law"},
      {"ic-scan", "incentive regimes of the window policy along scan.axis"},
      {"multipath-solve", "three-path value iteration and policy map"},
      {"reproduce", "data for one figure or table: fig2, fig3a-c, fig4, table1"},
      {"verify", "full acceptance suite"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    if (name == "reproduce") {
      sub->add_option("figure", figure, "fig2|fig3a|fig3b|fig3c|fig4|table1")
          ->required()
          ->check(CLI::IsMember(repro::figure_names()));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Run run;
  try {
    run.cfg = config_path.empty() ? cli::parse_config("") : cli::load_config(config_path);
    if (*seed_opt) run.cfg.seed = seed;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  run.out = out_dir;
  run.command = app.get_subcommands().front()->get_name();

  try {
    const std::string& c = run.command;
    if (c == "solve") return cmd_solve(run);
    if (c == "evaluate") return cmd_evaluate(run);
    if (c == "poa") return cmd_poa(run);
    if (c == "irm-audit") return cmd_irm_audit(run);
    if (c == "qlearn-online") return cmd_qlearn_online(run);
    if (c == "qlearn-asymptotic") return cmd_qlearn_asymptotic(run);
    if (c == "ic-scan") return cmd_ic_scan(run);
    if (c == "multipath-solve") return cmd_multipath_solve(run);
    if (c == "reproduce") {
      run.command += " " + figure;
      return cmd_reproduce(run, figure);
    }
    if (c == "verify") return cmd_verify(run);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
