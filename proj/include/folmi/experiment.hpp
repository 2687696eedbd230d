#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "folmi/fracsim.hpp"
#include "folmi/model.hpp"
#include "folmi/rng.hpp"
#include "folmi/synthesis.hpp"

namespace folmi {

// Monte-Carlo robustness experiments over sampled admissible uncertainties,
// and the CSV serialization consumed by external plotting.

struct SampleOutcome {
  int index = 0;
  double delta_norm = 0.0;      // Frobenius norm of the realization
  bool arg_check = false;       // linear sector check on the realized loop
  double final_norm = 0.0;      // plant-state norm at the end of the run
  bool diverged = false;
  bool failed = false;          // numerical failure, recorded not fatal
  std::string failure;
};

struct RobustnessReport {
  int n_samples = 0;
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::vector<SampleOutcome> samples;
  double stable_fraction = 0.0;
  double worst_final_norm = 0.0;

  /// A sample counts as stable when the linear sector check passes and the
  /// simulated plant state has contracted to 1% of max(1, ||x0||) by T.
  static bool sample_stable(const SampleOutcome& s, double x0_norm) {
    return !s.failed && !s.diverged && s.arg_check &&
           s.final_norm < 0.01 * std::max(1.0, x0_norm);
  }
};

inline RobustnessReport run_monte_carlo(const Plant& plant, const Controller& ctrl,
                                        int n_samples, std::uint64_t seed, double scale,
                                        const Vec& x0, const SimOptions& sim) {
  plant.require_consistent();
  ctrl.require_consistent_with(plant);
  if (!plant.unc) throw DimensionError("run_monte_carlo: plant has no uncertainty model");
  if (n_samples < 0) throw Error("run_monte_carlo: negative sample count");

  RobustnessReport rep;
  rep.n_samples = n_samples;
  rep.seed = seed;
  rep.scale = scale;
  rep.samples.resize(n_samples);
  const Vec xc0 = Vec::Zero(ctrl.nc());

  for (int i = 0; i < n_samples; ++i) {
    SampleOutcome& out = rep.samples[i];
    out.index = i;
    try {
      const Mat delta =
          sample_uncertainty(*plant.unc, seed + static_cast<std::uint64_t>(i) * 0x9e37ull, scale);
      out.delta_norm = delta.norm();
      const Plant realized = realize_plant(plant, delta);
      const ClosedLoop cl = assemble_closed_loop(realized, ctrl);
      out.arg_check = check_arg_condition(cl.A_psi, plant.q).stable;
      const Trajectory traj = simulate_closed_loop(plant, delta, ctrl, x0, xc0, sim);
      out.final_norm = traj.final_plant_norm();
      out.diverged = traj.diverged;
    } catch (const Error& e) {
      out.failed = true;
      out.failure = e.what();
    }
  }

  int stable = 0;
  double worst = 0.0;
  for (const auto& s : rep.samples) {
    if (RobustnessReport::sample_stable(s, x0.norm())) ++stable;
    worst = std::max(worst, s.final_norm);
  }
  rep.stable_fraction = n_samples > 0 ? static_cast<double>(stable) / n_samples : 0.0;
  rep.worst_final_norm = worst;
  return rep;
}

/// Open-loop showcase: several sampled plants integrated with u = 0 from a
/// common initial state. Divergence flags are expected for unstable draws.
inline std::vector<Trajectory> open_loop_showcase(const Plant& plant, int n_systems,
                                                  std::uint64_t seed, const Vec& x0,
                                                  const SimOptions& sim) {
  plant.require_consistent();
  if (!plant.unc) throw DimensionError("open_loop_showcase: plant has no uncertainty model");
  std::vector<Trajectory> out;
  const Controller zero = Controller::zero_static(plant.m(), plant.p());
  for (int i = 0; i < n_systems; ++i) {
    const Mat delta =
        sample_uncertainty(*plant.unc, seed + static_cast<std::uint64_t>(i) * 0x9e37ull, 1.0);
    out.push_back(simulate_closed_loop(plant, delta, zero, x0, Vec(0), sim));
  }
  return out;
}

namespace detail {

inline std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

}  // namespace detail

/// Trajectory CSV: header then one row per grid point, nine-decimal fixed
/// precision. Column order: t, x1.., xc1.., u1.., y1..
inline void write_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_csv: cannot open '" + path + "'");
  os << "t";
  for (int i = 0; i < traj.x.cols(); ++i) os << ",x" << (i + 1);
  for (int i = 0; i < traj.xc.cols(); ++i) os << ",xc" << (i + 1);
  for (int i = 0; i < traj.u.cols(); ++i) os << ",u" << (i + 1);
  for (int i = 0; i < traj.y.cols(); ++i) os << ",y" << (i + 1);
  os << "\n";
  const int rows = static_cast<int>(traj.x.rows());
  for (int r = 0; r < rows; ++r) {
    os << detail::format_cell(traj.t[r]);
    for (int c = 0; c < traj.x.cols(); ++c) os << "," << detail::format_cell(traj.x(r, c));
    for (int c = 0; c < traj.xc.cols(); ++c) os << "," << detail::format_cell(traj.xc(r, c));
    for (int c = 0; c < traj.u.cols(); ++c) os << "," << detail::format_cell(traj.u(r, c));
    for (int c = 0; c < traj.y.cols(); ++c) os << "," << detail::format_cell(traj.y(r, c));
    os << "\n";
  }
  if (!os) throw Error("write_csv: write failure on '" + path + "'");
}

/// Report CSV: one row per sample plus an aggregate footer row.
inline void write_csv(const RobustnessReport& rep, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_csv: cannot open '" + path + "'");
  os << "sample,delta_norm,arg_check,final_norm,diverged,failed\n";
  for (const auto& s : rep.samples) {
    os << s.index << "," << detail::format_cell(s.delta_norm) << "," << (s.arg_check ? 1 : 0)
       << "," << detail::format_cell(s.final_norm) << "," << (s.diverged ? 1 : 0) << ","
       << (s.failed ? 1 : 0) << "\n";
  }
  os << "aggregate," << detail::format_cell(rep.stable_fraction) << ",,"
     << detail::format_cell(rep.worst_final_norm) << ",,\n";
  if (!os) throw Error("write_csv: write failure on '" + path + "'");
}

/// Inverse of the trajectory writer (used by round-trip checks and external
/// consumers that want the arrays back).
inline Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("read_trajectory_csv: cannot open '" + path + "'");
  std::string header;
  if (!std::getline(is, header)) throw Error("read_trajectory_csv: empty file");
  int nx = 0, nxc = 0, nu = 0, ny = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind("xc", 0) == 0)
        ++nxc;
      else if (col.rfind('x', 0) == 0)
        ++nx;
      else if (col.rfind('u', 0) == 0)
        ++nu;
      else if (col.rfind('y', 0) == 0)
        ++ny;
    }
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != 1 + nx + nxc + nu + ny)
      throw Error("read_trajectory_csv: column count mismatch");
    rows.push_back(std::move(row));
  }
  Trajectory traj;
  const int n = static_cast<int>(rows.size());
  traj.t.resize(n);
  traj.x.resize(n, nx);
  traj.xc.resize(n, nxc);
  traj.u.resize(n, nu);
  traj.y.resize(n, ny);
  for (int r = 0; r < n; ++r) {
    int c = 0;
    traj.t[r] = rows[r][c++];
    for (int i = 0; i < nx; ++i) traj.x(r, i) = rows[r][c++];
    for (int i = 0; i < nxc; ++i) traj.xc(r, i) = rows[r][c++];
    for (int i = 0; i < nu; ++i) traj.u(r, i) = rows[r][c++];
    for (int i = 0; i < ny; ++i) traj.y(r, i) = rows[r][c++];
  }
  return traj;
}

}  // namespace folmi
