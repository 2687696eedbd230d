#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "folmi/fracsim.hpp"
#include "folmi/model.hpp"
#include "folmi/synthesis.hpp"

namespace folmi {

// JSON run configuration: matrices as row-major nested arrays, the
// nonlinearity as expression text. Controllers round-trip through the same
// format so synthesized gains feed straight back into analysis runs.

struct RunConfig {
  std::string name = "run";
  Plant plant;
  Vec x0;
  double uncertainty_scale = 1.0;

  SynthMode synth_mode = SynthMode::Theorem2;
  int n_c = 0;
  BuildOptions build;

  SimOptions sim;
  Vec xc0;  // resized (or zero-filled) against the controller order at use

  int mc_samples = 50;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int showcase_systems = 5;

  std::string out_dir = ".";
};

namespace detail {

using nlohmann::json;

inline Mat parse_matrix(const json& j, const std::string& key, int rows, int cols) {
  if (!j.is_array()) throw ConfigError("config: '" + key + "' must be a nested array");
  Mat m(rows, cols);
  if (static_cast<int>(j.size()) != rows)
    throw ConfigError("config: '" + key + "' must have " + std::to_string(rows) + " rows");
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw ConfigError("config: '" + key + "' row " + std::to_string(r) + " must have " +
                        std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw ConfigError("config: '" + key + "' entry (" + std::to_string(r) + "," +
                          std::to_string(c) + ") is not a number");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

inline Mat parse_matrix_auto(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw ConfigError("config: '" + key + "' must be a non-empty nested array");
  return parse_matrix(j, key, static_cast<int>(j.size()), static_cast<int>(j[0].size()));
}

inline Vec parse_vector(const json& j, const std::string& key, int len) {
  if (!j.is_array() || static_cast<int>(j.size()) != len)
    throw ConfigError("config: '" + key + "' must be an array of length " + std::to_string(len));
  Vec v(len);
  for (int i = 0; i < len; ++i) {
    if (!j[i].is_number()) throw ConfigError("config: '" + key + "' entry is not a number");
    v(i) = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }

  RunConfig cfg;
  try {
    cfg.name = j.value("name", std::string("run"));

    if (!j.contains("plant")) throw ConfigError("config: missing 'plant' section");
    const auto& jp = j.at("plant");
    Mat a = detail::parse_matrix_auto(jp.at("A"), "plant.A");
    if (a.rows() != a.cols()) throw ConfigError("config: plant.A must be square");
    const int n = static_cast<int>(a.rows());
    Mat b = detail::parse_matrix_auto(jp.at("B"), "plant.B");
    if (b.rows() != n) throw ConfigError("config: plant.B row count must match plant.A");
    const int m = static_cast<int>(b.cols());
    Mat c = detail::parse_matrix_auto(jp.at("C"), "plant.C");
    if (c.cols() != n) throw ConfigError("config: plant.C column count must match plant.A");
    if (jp.contains("n") && jp.at("n").get<int>() != n)
      throw ConfigError("config: plant.n disagrees with plant.A");
    if (jp.contains("m") && jp.at("m").get<int>() != m)
      throw ConfigError("config: plant.m disagrees with plant.B");
    if (jp.contains("p") && jp.at("p").get<int>() != static_cast<int>(c.rows()))
      throw ConfigError("config: plant.p disagrees with plant.C");

    cfg.plant.A = a;
    cfg.plant.B = b;
    cfg.plant.C = c;
    cfg.plant.q = jp.value("q", 0.9);
    if (!(cfg.plant.q > 0.0 && cfg.plant.q < 1.0))
      throw ConfigError("config: plant.q must satisfy 0 < q < 1");
    cfg.plant.xi = jp.value("xi", 0.0);
    const std::string phi_src = jp.value("phi", std::string("0"));
    try {
      std::string expanded = phi_src;
      if (phi_src == "0") {
        expanded.clear();
        for (int i = 0; i < n; ++i) expanded += i ? "; 0" : "0";
      }
      cfg.plant.phi = PhiFunction::parse(expanded, n, m);
    } catch (const ParseError& e) {
      throw ConfigError("config: plant.phi: " + std::string(e.what()));
    }
    cfg.x0 = jp.contains("x0") ? detail::parse_vector(jp.at("x0"), "plant.x0", n) : Vec::Zero(n);

    if (j.contains("uncertainty")) {
      const auto& ju = j.at("uncertainty");
      UncertaintyModel unc;
      unc.M = detail::parse_matrix_auto(ju.at("M"), "uncertainty.M");
      if (unc.M.rows() != n) throw ConfigError("config: uncertainty.M row count must match n");
      const int m0 = unc.m0();
      unc.N1 = detail::parse_matrix(ju.at("N1"), "uncertainty.N1", m0, n);
      unc.N2 = detail::parse_matrix(ju.at("N2"), "uncertainty.N2", m0, m);
      unc.J = detail::parse_matrix(ju.at("J"), "uncertainty.J", m0, m0);
      cfg.plant.unc = unc;
      cfg.uncertainty_scale = ju.value("scale", 1.0);
      if (cfg.uncertainty_scale < 0.0)
        throw ConfigError("config: uncertainty.scale must be nonnegative");
    }

    if (j.contains("synth")) {
      const auto& js = j.at("synth");
      const std::string mode = js.value("mode", std::string("theorem2"));
      if (mode == "theorem2")
        cfg.synth_mode = SynthMode::Theorem2;
      else if (mode == "certain")
        cfg.synth_mode = SynthMode::Certain;
      else if (mode == "corollary1")
        cfg.synth_mode = SynthMode::Corollary1;
      else
        throw ConfigError("config: synth.mode must be theorem2|certain|corollary1");
      cfg.n_c = js.value("n_c", 0);
      if (cfg.n_c < 0) throw ConfigError("config: synth.n_c must be nonnegative");
      cfg.build.margin = js.value("margin", 1e-6);
      if (cfg.build.margin < 0.0) throw ConfigError("config: synth.margin must be nonnegative");
      const std::string conv = js.value("xi_convention", std::string("squared"));
      if (conv == "squared")
        cfg.build.xi_convention = XiConvention::Squared;
      else if (conv == "plain")
        cfg.build.xi_convention = XiConvention::Plain;
      else
        throw ConfigError("config: synth.xi_convention must be squared|plain");
      cfg.build.structured = js.value("structured", true);
    }

    if (j.contains("sim")) {
      const auto& js = j.at("sim");
      cfg.sim.T = js.value("T", 20.0);
      cfg.sim.h = js.value("h", 1e-3);
      if (!(cfg.sim.h > 0.0) || !(cfg.sim.T >= cfg.sim.h))
        throw ConfigError("config: sim requires h > 0 and T >= h");
      if (js.contains("xc0")) {
        const auto& jx = js.at("xc0");
        cfg.xc0 = detail::parse_vector(jx, "sim.xc0", static_cast<int>(jx.size()));
      }
    }

    if (j.contains("robustness")) {
      const auto& jr = j.at("robustness");
      cfg.mc_samples = jr.value("samples", 50);
      if (cfg.mc_samples < 0) throw ConfigError("config: robustness.samples must be nonnegative");
      if (jr.contains("seed")) {
        cfg.seed = jr.at("seed").get<std::uint64_t>();
        cfg.seed_set = true;
      }
      cfg.showcase_systems = jr.value("showcase_systems", 5);
    }

    if (j.contains("output")) cfg.out_dir = j.at("output").value("dir", std::string("."));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }

  try {
    cfg.plant.require_consistent();
  } catch (const DimensionError& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return cfg;
}

inline Controller load_controller(const std::string& path, int m, int p) {
  std::ifstream is(path);
  if (!is) throw ConfigError("controller: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("controller: " + std::string(e.what()));
  }
  Controller c;
  try {
    const int nc = j.at("n_c").get<int>();
    if (nc < 0) throw ConfigError("controller: n_c must be nonnegative");
    c.Ac = nc > 0 ? detail::parse_matrix(j.at("Ac"), "Ac", nc, nc) : Mat(0, 0);
    c.Bc = nc > 0 ? detail::parse_matrix(j.at("Bc"), "Bc", nc, p) : Mat(0, p);
    c.Cc = nc > 0 ? detail::parse_matrix(j.at("Cc"), "Cc", m, nc) : Mat(m, 0);
    c.Dc = detail::parse_matrix(j.at("Dc"), "Dc", m, p);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("controller: " + std::string(e.what()));
  }
  return c;
}

inline void save_controller(const Controller& c, const std::string& path) {
  nlohmann::json j;
  auto put = [](const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index col = 0; col < m.cols(); ++col) row.push_back(m(r, col));
      rows.push_back(row);
    }
    return rows;
  };
  j["n_c"] = c.nc();
  j["Ac"] = put(c.Ac);
  j["Bc"] = put(c.Bc);
  j["Cc"] = put(c.Cc);
  j["Dc"] = put(c.Dc);
  std::ofstream os(path);
  if (!os) throw Error("save_controller: cannot open '" + path + "'");
  os << j.dump(2) << "\n";
}

}  // namespace folmi
