#include "immpc/config.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace immpc {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& problems) {
  std::ostringstream os;
  os << problems.size() << " config problem" << (problems.size() == 1 ? "" : "s");
  for (const auto& p : problems) os << "\n  " << p;
  return os.str();
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  void fail(const std::string& where, const std::string& what) {
    problems_.push_back(where + ": " + what);
  }

  double number(const json& obj, const std::string& key, double fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(where + "." + key, "expected a number");
      return fallback;
    }
    return v.get<double>();
  }

  std::int64_t integer(const json& obj, const std::string& key, std::int64_t fallback,
                       const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      fail(where + "." + key, "expected an integer");
      return fallback;
    }
    return v.get<std::int64_t>();
  }

  std::string string(const json& obj, const std::string& key, const std::string& fallback,
                     const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      fail(where + "." + key, "expected a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  bool boolean(const json& obj, const std::string& key, bool fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      fail(where + "." + key, "expected true or false");
      return fallback;
    }
    return v.get<bool>();
  }

  // {"uniform": [lo, hi]} or {"point": v}
  std::optional<BoundedDistribution> distribution(const json& obj, const std::string& key,
                                                  TimeUnit unit, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    const json& d = obj.at(key);
    const std::string here = where + "." + key;
    try {
      if (d.contains("uniform")) {
        const json& u = d.at("uniform");
        if (!u.is_array() || u.size() != 2 || !u[0].is_number() || !u[1].is_number()) {
          fail(here, "uniform needs [lo, hi]");
          return std::nullopt;
        }
        return BoundedDistribution::uniform(u[0].get<double>(), u[1].get<double>(), unit);
      }
      if (d.contains("point") && d.at("point").is_number())
        return BoundedDistribution::point(d.at("point").get<double>(), unit);
    } catch (const std::exception& e) {
      fail(here, e.what());
      return std::nullopt;
    }
    fail(here, "expected {\"uniform\": [lo, hi]} or {\"point\": v}");
    return std::nullopt;
  }

 private:
  std::vector<std::string>& problems_;
};

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open"});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
}

// Inline object or a path relative to base_dir.
json resolve(const json& v, const std::filesystem::path& base_dir, const std::string& where,
             std::vector<std::string>& problems) {
  if (!v.is_string()) return v;
  const std::filesystem::path p = base_dir / v.get<std::string>();
  try {
    return read_json(p);
  } catch (const ConfigError& e) {
    for (const auto& msg : e.problems()) problems.push_back(where + ": " + msg);
    return json();
  }
}

ModelBundle parse_model_into(const json& doc, std::vector<std::string>& problems) {
  Reader r(problems);
  ModelBundle b;
  b.actions = ActionSet::leop();
  if (!doc.is_object()) {
    r.fail("model", "expected an object");
    return b;
  }
  const double dt = r.number(doc, "dt_hours", 0.25, "model");
  if (!(dt > 0.0)) r.fail("model.dt_hours", "must be positive");

  std::vector<FaultMode> modes;
  int ok = -1, dead = -1;
  if (!doc.contains("modes") || !doc.at("modes").is_array() || doc.at("modes").empty()) {
    r.fail("model.modes", "expected a nonempty array");
  } else {
    const json& ms = doc.at("modes");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const json& m = ms[i];
      const std::string where = "model.modes[" + std::to_string(i) + "]";
      FaultMode f;
      f.id = static_cast<ModeId>(i);
      f.name = r.string(m, "name", "", where);
      if (f.name.empty()) r.fail(where + ".name", "missing");
      f.lethal = r.boolean(m, "lethal", false, where);
      if (r.boolean(m, "nominal", false, where)) {
        if (ok >= 0) r.fail(where, "second nominal mode");
        ok = f.id;
      }
      if (r.boolean(m, "absorbing", false, where)) {
        if (dead >= 0) r.fail(where, "second absorbing mode");
        dead = f.id;
      }
      if (m.is_object()) {
        f.ttd = r.distribution(m, "ttd_hours", TimeUnit::hours, where);
        f.recovery = r.distribution(m, "recovery_minutes", TimeUnit::minutes, where);
        if (m.contains("alpha")) f.alpha = r.number(m, "alpha", 0.5, where);
        if (m.contains("responsive")) {
          const json& acts = m.at("responsive");
          if (!acts.is_array()) {
            r.fail(where + ".responsive", "expected an array of action names");
          } else {
            for (const json& a : acts) {
              auto id = a.is_string() ? b.actions.find(a.get<std::string>()) : std::nullopt;
              if (!id) r.fail(where + ".responsive", "unknown action " + a.dump());
              else f.responsive_actions.push_back(*id);
            }
          }
        }
      }
      modes.push_back(std::move(f));
    }
    if (ok < 0) r.fail("model.modes", "no nominal mode");
    if (dead < 0) r.fail("model.modes", "no absorbing mode");
  }

  b.link.beta0 = r.number(doc.value("link", json::object()), "beta0", b.link.beta0, "model.link");
  b.link.beta_e = r.number(doc.value("link", json::object()), "beta_e", b.link.beta_e, "model.link");
  b.link.e_floor_deg =
      r.number(doc.value("link", json::object()), "e_floor_deg", b.link.e_floor_deg, "model.link");
  b.link.gamma = r.number(doc.value("link", json::object()), "gamma", b.link.gamma, "model.link");
  b.link.p_b = r.number(doc.value("link", json::object()), "p_b", b.link.p_b, "model.link");
  b.link.epsilon = r.number(doc.value("link", json::object()), "epsilon", b.link.epsilon, "model.link");
  try {
    b.link.validate();
  } catch (const std::exception& e) {
    r.fail("model.link", e.what());
  }

  if (!problems.empty()) return b;
  try {
    b.modes = ModeSet(modes, ok, dead);
  } catch (const std::exception& e) {
    r.fail("model.modes", e.what());
    return b;
  }

  Eigen::MatrixXd base = persistent_base(b.modes);
  if (doc.contains("base") && !(doc.at("base").is_string() && doc.at("base") == "persistent")) {
    const json& m = doc.at("base");
    const auto n = b.modes.size();
    if (!m.is_array() || m.size() != n) {
      r.fail("model.base", "expected \"persistent\" or a " + std::to_string(n) + "x" +
                               std::to_string(n) + " matrix");
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!m[i].is_array() || m[i].size() != n) {
          r.fail("model.base[" + std::to_string(i) + "]", "wrong row length");
          continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (!m[i][j].is_number()) r.fail("model.base", "non-numeric entry");
          else base(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].get<double>();
        }
      }
    }
  }
  if (!problems.empty()) return b;
  try {
    b.model = TransitionModel(b.modes, base, dt);
    b.likelihood = LikelihoodTable::leop(b.modes, b.actions, b.link);
  } catch (const std::exception& e) {
    r.fail("model", e.what());
    return b;
  }

  b.success = SuccessModel(b.modes.size(), b.actions.size());
  for (const FaultMode& m : b.modes.modes()) {
    b.success.set_from_likelihood(b.contact(), m.id);
    b.success.set_fixed(b.beacon(), m.id, 0.0);
    b.success.set_fixed(b.recover(), m.id, 0.0);
  }
  if (doc.contains("recover_success")) {
    const json& rs = doc.at("recover_success");
    if (!rs.is_object()) {
      r.fail("model.recover_success", "expected an object of mode -> probability");
    } else {
      for (const auto& [name, v] : rs.items()) {
        auto id = b.modes.find(name);
        if (!id) {
          r.fail("model.recover_success", "unknown mode " + name);
        } else if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0) {
          r.fail("model.recover_success." + name, "expected a probability");
        } else {
          b.success.set_fixed(b.recover(), *id, v.get<double>());
        }
      }
    }
  }
  return b;
}

GroundStation parse_station(const json& s, const std::string& where, Reader& r) {
  GroundStation g;
  g.name = r.string(s, "name", "", where);
  if (g.name.empty()) r.fail(where + ".name", "missing");
  if (!s.contains("latitude_deg")) r.fail(where + ".latitude_deg", "missing");
  if (!s.contains("longitude_deg")) r.fail(where + ".longitude_deg", "missing");
  g.latitude_deg = r.number(s, "latitude_deg", 0.0, where);
  g.longitude_deg = r.number(s, "longitude_deg", 0.0, where);
  g.altitude_m = r.number(s, "altitude_m", 0.0, where);
  g.min_elevation_deg = r.number(s, "min_elevation_deg", 5.0, where);
  try {
    g.validate();
  } catch (const std::exception& e) {
    r.fail(where, e.what());
  }
  return g;
}

std::vector<GroundStation> parse_stations_into(const json& doc, std::vector<std::string>& problems) {
  Reader r(problems);
  const json& list = doc.is_object() && doc.contains("stations") ? doc.at("stations") : doc;
  std::vector<GroundStation> out;
  if (!list.is_array()) {
    r.fail("stations", "expected an array");
    return out;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "stations[" + std::to_string(i) + "]";
    out.push_back(parse_station(list[i], where, r));
    for (std::size_t j = 0; j + 1 < out.size(); ++j)
      if (out[j].name == out.back().name) r.fail(where, "duplicate station name " + out.back().name);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

ModelBundle parse_model(const nlohmann::json& doc) {
  std::vector<std::string> problems;
  ModelBundle b = parse_model_into(doc, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return b;
}

ModelBundle load_model(const std::filesystem::path& path) { return parse_model(read_json(path)); }

ModelBundle default_leop_model() {
  const json doc = {
      {"dt_hours", 0.25},
      {"modes",
       {{{"name", "OK"}, {"nominal", true}, {"responsive", {"contact"}}},
        {{"name", "GNC"},
         {"lethal", true},
         {"ttd_hours", {{"uniform", {6, 24}}}},
         {"recovery_minutes", {{"uniform", {15, 120}}}},
         {"alpha", 0.5},
         {"responsive", {"contact", "recover"}}},
        {{"name", "COMMS"},
         {"recovery_minutes", {{"uniform", {15, 120}}}},
         {"responsive", {"recover"}}},
        {{"name", "DEP"},
         {"lethal", true},
         {"ttd_hours", {{"uniform", {6, 24}}}},
         {"recovery_minutes", {{"uniform", {15, 120}}}},
         {"alpha", 0.5},
         {"responsive", {"recover"}}},
        {{"name", "DEAD"}, {"absorbing", true}}}},
      {"base", "persistent"},
      {"recover_success", {{"GNC", 0.9}, {"COMMS", 0.9}, {"DEP", 0.5}}}};
  return parse_model(doc);
}

std::vector<GroundStation> parse_stations(const nlohmann::json& doc) {
  std::vector<std::string> problems;
  auto out = parse_stations_into(doc, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return out;
}

std::vector<OrbitSpec> SimConfig::orbits() const {
  std::vector<OrbitSpec> out;
  for (int k = 0; k < assets; ++k) {
    OrbitSpec o;
    o.altitude_km = fleet.altitude_km;
    o.inclination_deg = fleet.inclination_deg;
    const double frac = assets > 1 ? static_cast<double>(k) / (assets - 1) : 0.0;
    o.raan_deg = fleet.raan_deg + fleet.raan_spread_deg * frac;
    o.arg_latitude_deg = std::fmod(fleet.arg_latitude_deg - fleet.spacing_deg * k + 3600.0, 360.0);
    o.epoch = epoch;
    out.push_back(o);
  }
  return out;
}

Horizon SimConfig::horizon() const { return {epoch, add_hours(epoch, duration_hours)}; }

int SimConfig::horizon_steps() const {
  return std::max(1, static_cast<int>(std::ceil(planning.horizon_hours / model.model.dt() - 1e-9)));
}

SimConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  std::vector<std::string> problems;
  Reader r(problems);
  SimConfig c;
  if (!doc.is_object()) throw ConfigError({"config: expected a JSON object"});
  c.source = doc;

  c.name = r.string(doc, "name", "", "config");
  if (doc.contains("model")) {
    json m = resolve(doc.at("model"), base_dir, "config.model", problems);
    if (!m.is_null()) c.model = parse_model_into(m, problems);
    c.source["model"] = m;
  } else {
    c.model = default_leop_model();
  }
  if (!doc.contains("stations")) {
    r.fail("config.stations", "missing");
  } else {
    json s = resolve(doc.at("stations"), base_dir, "config.stations", problems);
    if (!s.is_null()) c.stations = parse_stations_into(s, problems);
    c.source["stations"] = s;
  }

  const std::int64_t assets = r.integer(doc, "assets", 0, "config");
  if (assets < 1) r.fail("config.assets", "must be at least 1");
  c.assets = static_cast<int>(std::max<std::int64_t>(assets, 0));
  const std::string epoch = r.string(doc, "epoch", "2026-01-01T00:00:00Z", "config");
  try {
    c.epoch = parse_iso8601(epoch);
  } catch (const std::exception& e) {
    r.fail("config.epoch", e.what());
  }
  c.duration_hours = r.number(doc, "duration_hours", c.duration_hours, "config");
  if (!(c.duration_hours >= 0.0)) r.fail("config.duration_hours", "must be nonnegative");
  c.step_seconds = r.number(doc, "step_seconds", c.step_seconds, "config");
  if (!(c.step_seconds > 0.0 && c.step_seconds <= 30.0))
    r.fail("config.step_seconds", "must lie in (0, 30]");
  c.t_sep_hours = r.number(doc, "t_sep_hours", 0.0, "config");
  if (!(c.t_sep_hours >= 0.0)) r.fail("config.t_sep_hours", "must be nonnegative");

  const json fleet = doc.value("fleet", json::object());
  c.fleet.altitude_km = r.number(fleet, "altitude_km", c.fleet.altitude_km, "config.fleet");
  c.fleet.inclination_deg = r.number(fleet, "inclination_deg", c.fleet.inclination_deg, "config.fleet");
  c.fleet.raan_deg = r.number(fleet, "raan_deg", c.fleet.raan_deg, "config.fleet");
  c.fleet.raan_spread_deg = r.number(fleet, "raan_spread_deg", c.fleet.raan_spread_deg, "config.fleet");
  c.fleet.arg_latitude_deg = r.number(fleet, "arg_latitude_deg", c.fleet.arg_latitude_deg, "config.fleet");
  c.fleet.spacing_deg = r.number(fleet, "spacing_deg", c.fleet.spacing_deg, "config.fleet");
  {
    OrbitSpec probe;
    probe.altitude_km = c.fleet.altitude_km;
    probe.inclination_deg = c.fleet.inclination_deg;
    try {
      probe.validate();
    } catch (const std::exception& e) {
      r.fail("config.fleet", e.what());
    }
  }

  const json plan = doc.value("planning", json::object());
  PlanningConfig& p = c.planning;
  p.horizon_hours = r.number(plan, "horizon_hours", p.horizon_hours, "config.planning");
  p.scenarios = static_cast<int>(r.integer(plan, "scenarios", p.scenarios, "config.planning"));
  p.lambda = r.number(plan, "lambda", p.lambda, "config.planning");
  p.theta = r.number(plan, "theta", p.theta, "config.planning");
  p.recover_threshold = r.number(plan, "recover_threshold", p.recover_threshold, "config.planning");
  p.exact_limit = static_cast<std::size_t>(
      std::max<std::int64_t>(0, r.integer(plan, "exact_limit", static_cast<std::int64_t>(p.exact_limit),
                                          "config.planning")));
  p.node_limit = static_cast<std::uint64_t>(std::max<std::int64_t>(
      1, r.integer(plan, "node_limit", static_cast<std::int64_t>(p.node_limit), "config.planning")));
  if (p.scenarios < 1) r.fail("config.planning.scenarios", "must be at least 1");
  if (p.lambda < 0.0) r.fail("config.planning.lambda", "must be nonnegative");
  if (!(p.theta > 0.0 && p.theta < 1.0)) r.fail("config.planning.theta", "must lie in (0,1)");
  if (!(p.recover_threshold >= 0.0 && p.recover_threshold <= 1.0))
    r.fail("config.planning.recover_threshold", "must lie in [0,1]");
  if (p.exact_limit > 64) r.fail("config.planning.exact_limit", "must be at most 64");
  if (c.model.model.dt() > 0.0 && p.horizon_hours < c.model.model.dt())
    r.fail("config.planning.horizon_hours", "must be at least dt");

  const json comp = doc.value("composition", json::object());
  c.composition.nominal = r.number(comp, "nominal", c.composition.nominal, "config.composition");
  c.composition.dead = r.number(comp, "dead", c.composition.dead, "config.composition");
  c.composition.faulted = r.number(comp, "faulted", c.composition.faulted, "config.composition");
  const double csum = c.composition.nominal + c.composition.dead + c.composition.faulted;
  if (c.composition.nominal < 0 || c.composition.dead < 0 || c.composition.faulted < 0 ||
      std::abs(csum - 1.0) > 1e-9)
    r.fail("config.composition", "fractions must be nonnegative and sum to 1");

  const bool model_ok = c.model.modes.size() > 0;
  if (doc.contains("fault_mix")) {
    const json& fm = doc.at("fault_mix");
    if (!fm.is_object()) {
      r.fail("config.fault_mix", "expected an object of mode -> share");
    } else {
      for (const auto& [k, v] : fm.items()) {
        if (!v.is_number() || v.get<double>() < 0.0) r.fail("config.fault_mix." + k, "expected a share >= 0");
        else c.fault_mix[k] = v.get<double>();
      }
    }
  } else {
    c.fault_mix = {{"GNC", 0.35}, {"DEP", 0.35}, {"COMMS", 0.30}};
  }
  double msum = 0.0;
  for (const auto& [k, v] : c.fault_mix) {
    msum += v;
    if (!model_ok) continue;
    auto id = c.model.modes.find(k);
    if (!id) r.fail("config.fault_mix", "unknown mode " + k);
    else if (*id == c.model.modes.ok() || *id == c.model.modes.dead())
      r.fail("config.fault_mix", k + " is not a fault mode");
  }
  if (std::abs(msum - 1.0) > 1e-9) r.fail("config.fault_mix", "shares must sum to 1");

  if (model_ok) {
    c.prior = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.model.modes.size()));
    if (!doc.contains("prior") || !doc.at("prior").is_object()) {
      r.fail("config.prior", "expected an object of mode -> probability");
    } else {
      for (const auto& [k, v] : doc.at("prior").items()) {
        auto id = c.model.modes.find(k);
        if (!id) r.fail("config.prior", "unknown mode " + k);
        else if (!v.is_number() || v.get<double>() < 0.0) r.fail("config.prior." + k, "expected a probability");
        else c.prior(*id) = v.get<double>();
      }
      if (std::abs(c.prior.sum() - 1.0) > 1e-9) r.fail("config.prior", "must sum to 1");
    }
  }

  c.priority.assign(static_cast<std::size_t>(c.assets), 1.0);
  if (doc.contains("priority")) {
    const json& q = doc.at("priority");
    if (q.is_number()) {
      std::fill(c.priority.begin(), c.priority.end(), q.get<double>());
    } else if (q.is_array() && q.size() == c.priority.size()) {
      for (std::size_t i = 0; i < q.size(); ++i)
        c.priority[i] = q[i].is_number() ? q[i].get<double>() : -1.0;
    } else {
      r.fail("config.priority", "expected a number or an array with one entry per asset");
    }
    for (double v : c.priority)
      if (!(v > 0.0)) {
        r.fail("config.priority", "priorities must be positive");
        break;
      }
  }

  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json(path), path.parent_path());
}

}  // namespace immpc
