#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "immpc/fault_model.hpp"
#include "immpc/geometry.hpp"
#include "immpc/observation_model.hpp"
#include "immpc/scenario.hpp"
#include "immpc/scheduler.hpp"

namespace immpc {

// Carries every problem found in a config document, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ModelBundle {
  ModeSet modes;
  ActionSet actions;
  TransitionModel model;
  LinkModel link;
  LikelihoodTable likelihood;
  SuccessModel success;

  ActionId contact() const { return actions.index_of("contact"); }
  ActionId beacon() const { return actions.index_of("beacon"); }
  ActionId recover() const { return actions.index_of("recover"); }
};

// Model document:
//   dt_hours, modes[{name, nominal?, absorbing?, lethal?, ttd_hours?, recovery_minutes?,
//   alpha?, responsive[]}], base ("persistent" or matrix), link{...}, recover_success{mode: p}.
// The likelihood table is the LEOP one and needs modes OK, GNC, COMMS, DEP, DEAD.
ModelBundle parse_model(const nlohmann::json& doc);
ModelBundle load_model(const std::filesystem::path& path);

ModelBundle default_leop_model();

struct FleetConfig {
  double altitude_km = 525.0;
  double inclination_deg = 97.4;
  double raan_deg = 0.0;
  double raan_spread_deg = 0.0;  // total RAAN spread across the fleet
  double arg_latitude_deg = 0.0;
  double spacing_deg = 2.0;      // along-track spacing between consecutive assets
};

struct PlanningConfig {
  double horizon_hours = 3.0;
  int scenarios = 50;
  double lambda = 0.1;
  double theta = 0.99;
  double recover_threshold = 0.2;
  std::size_t exact_limit = 64;
  std::uint64_t node_limit = 200'000;
};

struct Composition {
  double nominal = 0.70;
  double dead = 0.15;
  double faulted = 0.15;
};

struct SimConfig {
  std::string name;
  ModelBundle model;
  std::vector<GroundStation> stations;
  int assets = 0;
  UtcTime epoch{};
  double duration_hours = 24.0;
  double step_seconds = 20.0;
  double t_sep_hours = 0.0;
  Eigen::VectorXd prior;                 // mu_0 over modes
  Composition composition;
  std::map<std::string, double> fault_mix;  // faulted assets: mode name -> share
  std::vector<double> priority;          // q_i by asset id
  FleetConfig fleet;
  PlanningConfig planning;
  nlohmann::json source;                 // resolved document, for manifests

  std::vector<OrbitSpec> orbits() const;
  Horizon horizon() const;
  int horizon_steps() const;             // planning horizon in dt steps
};

// Model and station entries may be inline objects or paths relative to
// base_dir. Throws ConfigError listing every problem.
SimConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
SimConfig load_config(const std::filesystem::path& path);

std::vector<GroundStation> parse_stations(const nlohmann::json& doc);

}  // namespace immpc
