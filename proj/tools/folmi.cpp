// folmi - fixed-order output-feedback synthesis for Lipschitz fractional-order
// systems: LMI synthesis, stability analysis, Caputo simulation, Monte-Carlo
// robustness experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "folmi/config.hpp"
#include "folmi/experiment.hpp"
#include "folmi/synthesis.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 2;   // infeasible / unstable / divergent
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

bool log_enabled() {
  const char* v = std::getenv("FOLMI_LOG");
  return v != nullptr && std::string(v) != "" && std::string(v) != "0";
}

void logln(const std::string& msg) {
  if (log_enabled()) std::cerr << "[folmi] " << msg << "\n";
}

void print_matrix(const std::string& name, const folmi::Mat& m) {
  std::cout << name << " =";
  if (m.size() == 0) {
    std::cout << " []\n";
    return;
  }
  std::cout << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::cout << "   ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) std::cout << " " << m(r, c);
    std::cout << "\n";
  }
}

struct CommonArgs {
  std::string config_path;
  std::optional<int> nc;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  std::optional<std::string> xi_convention;
  std::string controller_path;
  std::string dump_lmi_path;
  int showcase_systems = 0;
};

folmi::RunConfig load_with_overrides(const CommonArgs& args) {
  folmi::RunConfig cfg = folmi::load_config(args.config_path);
  if (args.nc) cfg.n_c = *args.nc;
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.seed_set = true;
  }
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  if (args.mode) {
    if (*args.mode == "theorem2")
      cfg.synth_mode = folmi::SynthMode::Theorem2;
    else if (*args.mode == "certain")
      cfg.synth_mode = folmi::SynthMode::Certain;
    else if (*args.mode == "corollary1")
      cfg.synth_mode = folmi::SynthMode::Corollary1;
    else
      throw folmi::ConfigError("--mode must be theorem2|certain|corollary1");
  }
  if (args.xi_convention) {
    if (*args.xi_convention == "squared")
      cfg.build.xi_convention = folmi::XiConvention::Squared;
    else if (*args.xi_convention == "plain")
      cfg.build.xi_convention = folmi::XiConvention::Plain;
    else
      throw folmi::ConfigError("--xi-convention must be squared|plain");
  }
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

folmi::Controller resolve_controller(const folmi::RunConfig& cfg, const std::string& path) {
  if (path.empty() || path == "none")
    return folmi::Controller::zero_static(cfg.plant.m(), cfg.plant.p());
  return folmi::load_controller(path, cfg.plant.m(), cfg.plant.p());
}

int cmd_validate(const CommonArgs& args) {
  folmi::RunConfig cfg = load_with_overrides(args);
  const folmi::ValidationReport rep = folmi::validate(cfg.plant);
  for (const auto& c : rep.checks)
    std::cout << (c.passed ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
  folmi::SampleBox box;
  for (int i = 0; i < cfg.plant.n(); ++i) box.x.push_back({-M_PI, M_PI});
  for (int i = 0; i < cfg.plant.m(); ++i) box.u.push_back({-1.0, 1.0});
  const double xi_hat =
      folmi::estimate_lipschitz(cfg.plant.phi, box, 20000, cfg.seed_set ? cfg.seed : 1);
  std::cout << "advisory: sampled Lipschitz estimate on [-pi,pi]^n x [-1,1]^m: " << xi_hat
            << " (configured xi = " << cfg.plant.xi << ")\n";
  return rep.all_passed() ? kExitOk : kExitVerdict;
}

int cmd_synth(const CommonArgs& args) {
  folmi::RunConfig cfg = load_with_overrides(args);
  logln("building synthesis problem, n_c = " + std::to_string(cfg.n_c));
  folmi::SynthProblem sp =
      cfg.synth_mode == folmi::SynthMode::Theorem2 ? folmi::build_theorem2(cfg.plant, cfg.n_c, cfg.build)
      : cfg.synth_mode == folmi::SynthMode::Certain
          ? folmi::build_certain(cfg.plant, cfg.n_c, cfg.build)
          : folmi::build_corollary1(cfg.plant, cfg.n_c, cfg.build);
  if (cfg.synth_mode == folmi::SynthMode::Corollary1)
    std::cout << "note: corollary1 mode is experimental\n";
  if (!args.dump_lmi_path.empty()) {
    std::ofstream os(args.dump_lmi_path);
    folmi::dump_problem(sp.lmi, os);
    logln("LMI dump written to " + args.dump_lmi_path);
  }
  std::cout << "decision scalars: " << sp.lmi.vars().size() << "\n";

  const folmi::Feasibility fe = folmi::solve_feasibility(sp.lmi);
  if (fe.verdict == folmi::Verdict::Indeterminate) {
    std::cout << "verdict: indeterminate (iteration cap)\n";
    return kExitNumerical;
  }
  if (fe.verdict == folmi::Verdict::Infeasible) {
    std::cout << "verdict: infeasible (t* = " << fe.t_star << ")\n";
    return kExitVerdict;
  }
  for (double m : folmi::recheck(sp.lmi, fe.assignment))
    if (!(m > 0.0)) {
      std::cout << "verdict: infeasible (recheck rejected the solver point)\n";
      return kExitVerdict;
    }
  std::cout << "verdict: feasible (t* = " << fe.t_star
            << ", achieved margin = " << fe.achieved_margin << ")\n";

  const folmi::SynthesisResult res = folmi::recover_controller(sp, fe.assignment, cfg.plant);
  print_matrix("Ac", res.controller.Ac);
  print_matrix("Bc", res.controller.Bc);
  print_matrix("Cc", res.controller.Cc);
  print_matrix("Dc", res.controller.Dc);
  std::cout << "recovery residuals: ||Bc C Pu - B|| = " << res.residual_B
            << ", ||Dc C Pu - D|| = " << res.residual_D << "\n";
  std::cout << "nominal arg-check: " << (res.nominal_arg_check ? "stable" : "UNSTABLE") << "\n";

  bool th1_ok = true;
  if (cfg.synth_mode != folmi::SynthMode::Corollary1) {
    const folmi::Feasibility th1 = folmi::verify_theorem1(cfg.plant, res.controller, cfg.build);
    th1_ok = th1.verdict == folmi::Verdict::Feasible;
    std::cout << "analysis check on recovered controller: " << (th1_ok ? "feasible" : "FAILED")
              << "\n";
  }

  const std::string out = cfg.out_dir + "/" + cfg.name + "_controller_nc" +
                          std::to_string(cfg.n_c) + ".json";
  folmi::save_controller(res.controller, out);
  std::cout << "controller written: " << out << "\n";
  return (res.nominal_arg_check && th1_ok) ? kExitOk : kExitVerdict;
}

int cmd_analyze(const CommonArgs& args) {
  folmi::RunConfig cfg = load_with_overrides(args);
  const folmi::Controller ctrl = resolve_controller(cfg, args.controller_path);
  const folmi::ClosedLoop cl = folmi::assemble_closed_loop(cfg.plant, ctrl);
  const folmi::StabilityVerdict sv = folmi::check_arg_condition(cl.A_psi, cfg.plant.q);
  std::cout << "arg-check: min |arg(eig)| = " << sv.min_arg << " vs threshold " << sv.threshold
            << " -> " << (sv.stable ? "stable" : "unstable") << "\n";
  const folmi::Feasibility th1 = folmi::verify_theorem1(cfg.plant, ctrl, cfg.build);
  const bool feasible = th1.verdict == folmi::Verdict::Feasible;
  std::cout << "analysis LMI: "
            << (feasible ? "feasible (robust stability certified)"
                         : (th1.verdict == folmi::Verdict::Infeasible ? "infeasible"
                                                                      : "indeterminate"))
            << "\n";
  if (th1.verdict == folmi::Verdict::Indeterminate) return kExitNumerical;
  return (sv.stable && feasible) ? kExitOk : kExitVerdict;
}

int cmd_simulate(const CommonArgs& args) {
  folmi::RunConfig cfg = load_with_overrides(args);
  const folmi::Controller ctrl = resolve_controller(cfg, args.controller_path);
  folmi::Vec xc0 = folmi::Vec::Zero(ctrl.nc());
  if (cfg.xc0.size() > 0) {
    if (cfg.xc0.size() != ctrl.nc())
      throw folmi::ConfigError("sim.xc0 length does not match the controller order");
    xc0 = cfg.xc0;
  }
  const folmi::Trajectory traj =
      folmi::simulate_closed_loop(cfg.plant, std::nullopt, ctrl, cfg.x0, xc0, cfg.sim);
  const std::string out = cfg.out_dir + "/" + cfg.name + "_traj_0.csv";
  folmi::write_csv(traj, out);
  std::cout << "trajectory written: " << out << "\n";
  std::cout << "final plant-state norm: " << traj.final_plant_norm()
            << (traj.diverged ? " (diverged)" : "") << "\n";
  if (traj.diverged) {
    std::cout << "note: trajectory diverged before reaching T\n";
    return kExitVerdict;
  }
  if (traj.final_plant_norm() > cfg.x0.norm()) {
    std::cout << "note: non-convergent (final norm exceeds the initial state norm)\n";
    return kExitVerdict;
  }
  return kExitOk;
}

int cmd_robustness(const CommonArgs& args) {
  folmi::RunConfig cfg = load_with_overrides(args);
  if (!cfg.seed_set) throw folmi::ConfigError("robustness requires a seed (config or --seed)");
  const folmi::Controller ctrl = resolve_controller(cfg, args.controller_path);
  const folmi::RobustnessReport rep = folmi::run_monte_carlo(
      cfg.plant, ctrl, cfg.mc_samples, cfg.seed, cfg.uncertainty_scale, cfg.x0, cfg.sim);
  const std::string out = cfg.out_dir + "/" + cfg.name + "_report.csv";
  folmi::write_csv(rep, out);
  std::cout << "report written: " << out << "\n";
  std::cout << "stable fraction: " << rep.stable_fraction
            << ", worst final norm: " << rep.worst_final_norm << "\n";
  return rep.stable_fraction == 1.0 ? kExitOk : kExitVerdict;
}

int cmd_showcase(const CommonArgs& args) {
  folmi::RunConfig cfg = load_with_overrides(args);
  if (!cfg.seed_set) throw folmi::ConfigError("showcase requires a seed (config or --seed)");
  const int n_sys = args.showcase_systems > 0 ? args.showcase_systems : cfg.showcase_systems;
  const auto trajs = folmi::open_loop_showcase(cfg.plant, n_sys, cfg.seed, cfg.x0, cfg.sim);
  int convergent = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const std::string out =
        cfg.out_dir + "/" + cfg.name + "_traj_" + std::to_string(i) + ".csv";
    folmi::write_csv(trajs[i], out);
    const bool nonconv = trajs[i].diverged || trajs[i].final_plant_norm() > cfg.x0.norm();
    if (!nonconv) ++convergent;
    std::cout << "system " << i << ": final norm " << trajs[i].final_plant_norm()
              << (trajs[i].diverged ? " (diverged)" : "") << " -> "
              << (nonconv ? "non-convergent" : "convergent") << "\n";
  }
  std::cout << "non-convergent: " << (trajs.size() - convergent) << "/" << trajs.size() << "\n";
  // Open-loop runs document instability; all-non-convergent is the expected
  // "success" reading for an unstable plant.
  return convergent == 0 ? kExitOk : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixed-order output-feedback synthesis for fractional-order systems"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool with_controller) {
    sub->add_option("config", args.config_path, "JSON run configuration")->required();
    sub->add_option("--nc", args.nc, "controller order override");
    sub->add_option("--seed", args.seed, "sampling seed override");
    sub->add_option("--out", args.out_dir, "output directory override");
    sub->add_option("--mode", args.mode, "synthesis mode: theorem2|certain|corollary1");
    sub->add_option("--xi-convention", args.xi_convention, "Lipschitz term convention");
    if (with_controller)
      sub->add_option("--controller", args.controller_path,
                      "controller JSON path, or 'none' for u = 0");
  };

  auto* validate = app.add_subcommand("validate", "model assumption checks");
  add_common(validate, false);
  auto* synth = app.add_subcommand("synth", "build + solve the synthesis LMIs, recover gains");
  add_common(synth, false);
  synth->add_option("--dump-lmi", args.dump_lmi_path, "write the LMI standard-form dump here");
  auto* analyze = app.add_subcommand("analyze", "stability checks for a fixed controller");
  add_common(analyze, true);
  auto* simulate = app.add_subcommand("simulate", "closed-loop Caputo trajectory to CSV");
  add_common(simulate, true);
  auto* robustness = app.add_subcommand("robustness", "Monte-Carlo robustness report to CSV");
  add_common(robustness, true);
  auto* showcase = app.add_subcommand("showcase", "open-loop sampled-system runs to CSV");
  add_common(showcase, false);
  showcase->add_option("--systems", args.showcase_systems, "number of sampled systems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(args);
    if (synth->parsed()) return cmd_synth(args);
    if (analyze->parsed()) return cmd_analyze(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (robustness->parsed()) return cmd_robustness(args);
    if (showcase->parsed()) return cmd_showcase(args);
  } catch (const folmi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const folmi::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const folmi::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const folmi::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const folmi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
