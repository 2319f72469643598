#include "mpctune/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mpctune::config {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) {
  throw std::runtime_error("config: " + message);
}

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& known) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (known.find(key) == known.end()) {
      fail("unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("key \"" + key + "\" has the wrong type");
  }
}

std::pair<double, double> get_pair(const json& j, const std::string& key,
                                   std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) fail("key \"" + key + "\" must be [lo, hi]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "config",
             {"scenario", "seeds", "budget", "n_init", "replicates", "assess_runs",
              "out_dir", "log_wall_time", "threads", "plant", "noise",
              "horizon_steps", "dt", "substeps", "epsilon", "mpc", "scaling",
              "theta_bounds", "bo", "prbs"});

  ExperimentConfig cfg;
  cfg.scenario = get_or<std::string>(j, "scenario", "noise_free");
  if (cfg.scenario != "noise_free" && cfg.scenario != "noisy") {
    fail("scenario must be \"noise_free\" or \"noisy\"");
  }
  cfg.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {1});
  if (cfg.seeds.empty()) fail("seeds must be non-empty");
  cfg.budget = get_or<int>(j, "budget", 40);
  cfg.n_init = get_or<int>(j, "n_init", 5);
  cfg.replicates = get_or<int>(j, "replicates", 1);
  cfg.assess_runs = get_or<int>(j, "assess_runs", 100);
  cfg.out_dir = get_or<std::string>(j, "out_dir", "");
  cfg.log_wall_time = get_or<bool>(j, "log_wall_time", false);
  cfg.threads = get_or<int>(j, "threads", 0);

  auto& scenario = cfg.scenario_config;
  scenario.horizon_steps = get_or<int>(j, "horizon_steps", 40);
  scenario.dt = get_or<double>(j, "dt", 0.005);
  scenario.substeps = get_or<int>(j, "substeps", 10);
  scenario.epsilon = get_or<double>(j, "epsilon", 0.05);

  {
    const json plant_json = j.contains("plant") ? j.at("plant") : json::object();
    check_keys(plant_json, "plant",
               {"k01", "k02", "k03", "Ea1R", "Ea2R", "Ea3R", "dH_AB", "dH_BC",
                "dH_AD", "rho", "cp", "cpK", "A", "VR", "mK", "Tin", "kW",
                "QK_dot", "cA0"});
    auto& p = scenario.plant;
    p.k01 = get_or<double>(plant_json, "k01", p.k01);
    p.k02 = get_or<double>(plant_json, "k02", p.k02);
    p.k03 = get_or<double>(plant_json, "k03", p.k03);
    p.Ea1R = get_or<double>(plant_json, "Ea1R", p.Ea1R);
    p.Ea2R = get_or<double>(plant_json, "Ea2R", p.Ea2R);
    p.Ea3R = get_or<double>(plant_json, "Ea3R", p.Ea3R);
    p.dH_AB = get_or<double>(plant_json, "dH_AB", p.dH_AB);
    p.dH_BC = get_or<double>(plant_json, "dH_BC", p.dH_BC);
    p.dH_AD = get_or<double>(plant_json, "dH_AD", p.dH_AD);
    p.rho = get_or<double>(plant_json, "rho", p.rho);
    p.cp = get_or<double>(plant_json, "cp", p.cp);
    p.cpK = get_or<double>(plant_json, "cpK", p.cpK);
    p.A = get_or<double>(plant_json, "A", p.A);
    p.VR = get_or<double>(plant_json, "VR", p.VR);
    p.mK = get_or<double>(plant_json, "mK", p.mK);
    p.Tin = get_or<double>(plant_json, "Tin", p.Tin);
    p.kW = get_or<double>(plant_json, "kW", p.kW);
    p.QK_dot = get_or<double>(plant_json, "QK_dot", p.QK_dot);
    if (!plant_json.contains("cA0")) {
      fail("plant.cA0 (feed concentration, mol/L) is required and has no "
           "default; the benchmark runs documented in the README use 5.1");
    }
    p.cA0 = plant_json.at("cA0").get<double>();
  }

  {
    const json noise_json = j.contains("noise") ? j.at("noise") : json::object();
    check_keys(noise_json, "noise", {"sigma_B", "sigma_R"});
    const bool noisy = cfg.scenario == "noisy";
    scenario.noise.sigma_B = get_or<double>(noise_json, "sigma_B", noisy ? 0.2 : 0.0);
    scenario.noise.sigma_R = get_or<double>(noise_json, "sigma_R", noisy ? 10.0 : 0.0);
    if (scenario.noise.sigma_B < 0.0 || scenario.noise.sigma_R < 0.0) {
      fail("noise std deviations must be >= 0");
    }
  }

  {
    const json scaling_json = j.contains("scaling") ? j.at("scaling") : json::object();
    check_keys(scaling_json, "scaling", {"cB", "TR", "F"});
    const auto cB = get_pair(scaling_json, "cB", {0.0, 2.0});
    const auto TR = get_pair(scaling_json, "TR", {100.0, 150.0});
    const auto F = get_pair(scaling_json, "F", {5.0, 35.0});
    scenario.mpc.scaling.cB = narx::SignalRange(cB.first, cB.second);
    scenario.mpc.scaling.TR = narx::SignalRange(TR.first, TR.second);
    scenario.mpc.scaling.F = narx::SignalRange(F.first, F.second);
  }

  {
    const json mpc_json = j.contains("mpc") ? j.at("mpc") : json::object();
    check_keys(mpc_json, "mpc",
               {"Np", "F_bounds", "T_bounds", "penalty_weight", "solver"});
    auto& m = scenario.mpc;
    m.Np = get_or<int>(mpc_json, "Np", 10);
    const auto F_bounds = get_pair(mpc_json, "F_bounds", {5.0, 35.0});
    const auto T_bounds = get_pair(mpc_json, "T_bounds", {100.0, 150.0});
    m.F_min = F_bounds.first;
    m.F_max = F_bounds.second;
    m.T_min = T_bounds.first;
    m.T_max = T_bounds.second;
    m.penalty_weight = get_or<double>(mpc_json, "penalty_weight", 1e3);
    m.dt = scenario.dt;
    m.Vin = scenario.plant.VR;
    const json solver_json =
        mpc_json.contains("solver") ? mpc_json.at("solver") : json::object();
    check_keys(solver_json, "mpc.solver", {"restarts", "max_iters", "tolerance"});
    m.solver.restarts = get_or<int>(solver_json, "restarts", 8);
    m.solver.max_iters = get_or<int>(solver_json, "max_iters", 500);
    m.solver.tolerance = get_or<double>(solver_json, "tolerance", 1e-10);
  }

  {
    const json bounds_json =
        j.contains("theta_bounds") ? j.at("theta_bounds") : json::object();
    check_keys(bounds_json, "theta_bounds", {"narx", "backoff"});
    const auto narx_bounds = get_pair(bounds_json, "narx", {-2.0, 2.0});
    const auto backoff_bounds = get_pair(bounds_json, "backoff", {0.0, 0.2});
    std::vector<std::pair<double, double>> bounds(14, narx_bounds);
    bounds.push_back(backoff_bounds);
    cfg.theta_box = math::Box(std::move(bounds));
  }

  {
    const json bo_json = j.contains("bo") ? j.at("bo") : json::object();
    check_keys(bo_json, "bo", {"beta", "restarts", "local_iters", "gp"});
    cfg.bo.budget = cfg.budget;
    cfg.bo.n_init = cfg.n_init;
    cfg.bo.acquisition =
        acq::AcquisitionConfig(get_or<double>(bo_json, "beta", 0.05),
                               get_or<int>(bo_json, "restarts", 32),
                               get_or<int>(bo_json, "local_iters", 200));
    const json gp_json = bo_json.contains("gp") ? bo_json.at("gp") : json::object();
    check_keys(gp_json, "bo.gp",
               {"restarts", "max_evals", "lengthscale_bounds",
                "signal_variance_bounds", "noise_variance_bounds"});
    auto& fit = cfg.bo.gp_fit;
    fit.restarts = get_or<int>(gp_json, "restarts", 8);
    fit.max_evals_per_restart = get_or<int>(gp_json, "max_evals", 400);
    const auto l = get_pair(gp_json, "lengthscale_bounds", {0.05, 20.0});
    const auto sv = get_pair(gp_json, "signal_variance_bounds", {1e-6, 1e6});
    const auto nv = get_pair(gp_json, "noise_variance_bounds", {1e-10, 1e2});
    fit.bounds.lengthscale_min = l.first;
    fit.bounds.lengthscale_max = l.second;
    fit.bounds.signal_variance_min = sv.first;
    fit.bounds.signal_variance_max = sv.second;
    fit.bounds.noise_variance_min = nv.first;
    fit.bounds.noise_variance_max = nv.second;
  }

  {
    const json prbs_json = j.contains("prbs") ? j.at("prbs") : json::object();
    check_keys(prbs_json, "prbs", {"n_points", "hold_steps"});
    cfg.prbs_points = get_or<int>(prbs_json, "n_points", 3000);
    cfg.prbs_hold_steps = get_or<int>(prbs_json, "hold_steps", 100);
  }

  cfg.bo.validate();
  cfg.scenario_config.validate();
  if (cfg.replicates < 1) fail("replicates must be >= 1");
  if (cfg.assess_runs < 1) fail("assess_runs must be >= 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::ordered_json ExperimentConfig::resolved() const {
  ordered_json j;
  j["scenario"] = scenario;
  j["seeds"] = seeds;
  j["budget"] = budget;
  j["n_init"] = n_init;
  j["replicates"] = replicates;
  j["assess_runs"] = assess_runs;
  j["log_wall_time"] = log_wall_time;
  j["threads"] = threads;

  const auto& p = scenario_config.plant;
  j["plant"] = ordered_json{{"k01", p.k01},     {"k02", p.k02},   {"k03", p.k03},
                            {"Ea1R", p.Ea1R},   {"Ea2R", p.Ea2R}, {"Ea3R", p.Ea3R},
                            {"dH_AB", p.dH_AB}, {"dH_BC", p.dH_BC},
                            {"dH_AD", p.dH_AD}, {"rho", p.rho},   {"cp", p.cp},
                            {"cpK", p.cpK},     {"A", p.A},       {"VR", p.VR},
                            {"mK", p.mK},       {"Tin", p.Tin},   {"kW", p.kW},
                            {"QK_dot", p.QK_dot}, {"cA0", p.cA0}};
  j["noise"] = ordered_json{{"sigma_B", scenario_config.noise.sigma_B},
                            {"sigma_R", scenario_config.noise.sigma_R}};
  j["horizon_steps"] = scenario_config.horizon_steps;
  j["dt"] = scenario_config.dt;
  j["substeps"] = scenario_config.substeps;
  j["epsilon"] = scenario_config.epsilon;

  const auto& m = scenario_config.mpc;
  j["mpc"] = ordered_json{
      {"Np", m.Np},
      {"F_bounds", {m.F_min, m.F_max}},
      {"T_bounds", {m.T_min, m.T_max}},
      {"penalty_weight", m.penalty_weight},
      {"Vin", m.Vin},
      {"solver",
       ordered_json{{"restarts", m.solver.restarts},
                    {"max_iters", m.solver.max_iters},
                    {"tolerance", m.solver.tolerance}}}};
  j["scaling"] = ordered_json{{"cB", {m.scaling.cB.min, m.scaling.cB.max}},
                              {"TR", {m.scaling.TR.min, m.scaling.TR.max}},
                              {"F", {m.scaling.F.min, m.scaling.F.max}}};
  j["theta_bounds"] = ordered_json{{"narx", {theta_box.lo(0), theta_box.hi(0)}},
                                   {"backoff", {theta_box.lo(14), theta_box.hi(14)}}};
  const auto& fit = bo.gp_fit;
  j["bo"] = ordered_json{
      {"beta", bo.acquisition.beta},
      {"restarts", bo.acquisition.restarts},
      {"local_iters", bo.acquisition.local_iters},
      {"gp",
       ordered_json{{"restarts", fit.restarts},
                    {"max_evals", fit.max_evals_per_restart},
                    {"lengthscale_bounds",
                     {fit.bounds.lengthscale_min, fit.bounds.lengthscale_max}},
                    {"signal_variance_bounds",
                     {fit.bounds.signal_variance_min, fit.bounds.signal_variance_max}},
                    {"noise_variance_bounds",
                     {fit.bounds.noise_variance_min, fit.bounds.noise_variance_max}}}}};
  j["prbs"] = ordered_json{{"n_points", prbs_points}, {"hold_steps", prbs_hold_steps}};
  return j;
}

harness::TuningParams load_theta(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open theta file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path + " is not valid JSON: " + e.what());
  }

  Eigen::VectorXd theta(15);
  if (j.contains("theta")) {
    const auto values = j.at("theta").get<std::vector<double>>();
    if (values.size() != 15) fail("theta array must have 15 entries");
    for (int i = 0; i < 15; ++i) theta[i] = values[static_cast<std::size_t>(i)];
  } else if (j.contains("narx") && j.contains("backoff")) {
    const auto narx_values = j.at("narx").get<std::vector<double>>();
    if (narx_values.size() != 14) fail("narx array must have 14 entries");
    for (int i = 0; i < 14; ++i) theta[i] = narx_values[static_cast<std::size_t>(i)];
    theta[14] = j.at("backoff").get<double>();
  } else {
    fail(path + " must contain either \"theta\" or \"narx\"+\"backoff\"");
  }
  return harness::TuningParams::from_vector(theta);
}

nlohmann::ordered_json theta_to_json(const harness::TuningParams& theta) {
  const Eigen::VectorXd flat = theta.to_vector();
  std::vector<double> narx_values(flat.data(), flat.data() + 14);
  ordered_json j;
  j["narx"] = narx_values;
  j["backoff"] = theta.backoff;
  return j;
}

}  // namespace mpctune::config
