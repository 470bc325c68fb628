#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "immpc/sim.hpp"

namespace py = pybind11;
using namespace immpc;
using nlohmann::json;

namespace {

ModelBundle model_from(const std::string& path) {
  return path.empty() ? default_leop_model() : load_model(path);
}

Belief as_belief(const Eigen::VectorXd& mu, double tau) {
  Belief b{mu, tau, 0};
  check_belief(b);
  return b;
}

// Problem document: windows [{id, asset, station, start_s, end_s}], z, info,
// q, lambda, scenarios, cliques (optional; derived from overlaps otherwise).
ScheduleProblem problem_from_json(const json& doc) {
  ScheduleProblem p;
  for (const json& w : doc.at("windows")) {
    ContactWindow c;
    c.id = w.at("id").get<int>();
    c.asset = w.at("asset").get<int>();
    c.station = w.value("station", std::string("S"));
    c.start = UtcTime{static_cast<std::int64_t>(w.value("start_s", 0.0) * 1000.0)};
    c.end = UtcTime{static_cast<std::int64_t>(w.value("end_s", 0.0) * 1000.0)};
    c.e_max_deg = w.value("e_max_deg", 45.0);
    p.windows.push_back(c);
  }
  p.z = doc.at("z").get<std::vector<std::vector<std::uint8_t>>>();
  p.info = doc.value("info", std::vector<double>(p.windows.size(), 0.0));
  p.q = doc.at("q").get<std::vector<double>>();
  p.lambda = doc.value("lambda", 0.0);
  p.scenarios = doc.value("scenarios", p.z.empty() ? 1 : static_cast<int>(p.z.front().size()));
  p.cliques = doc.contains("cliques") ? doc.at("cliques").get<std::vector<std::vector<int>>>()
                                      : exclusion_cliques(p.windows);
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "IMM-MPC fleet acquisition core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ImpossibleEvidence>(m, "ImpossibleEvidence", PyExc_ValueError);

  m.def("link_probability",
        [](double e_max_deg, double beta0, double beta_e, double e_floor_deg) {
          LinkModel l;
          l.beta0 = beta0;
          l.beta_e = beta_e;
          l.e_floor_deg = e_floor_deg;
          return link_probability(l, e_max_deg);
        },
        py::arg("e_max_deg"), py::arg("beta0") = 0.8, py::arg("beta_e") = 1.5, py::arg("e_floor_deg") = 5.0);

  m.def("mode_names", [](const std::string& model) {
    const ModelBundle mb = model_from(model);
    std::vector<std::string> out;
    for (const FaultMode& f : mb.modes.modes()) out.push_back(f.name);
    return out;
  }, py::arg("model") = "");

  m.def("transition_matrix", [](double tau, const std::string& model) {
    return transition_matrix(model_from(model).model, tau);
  }, py::arg("tau_hours"), py::arg("model") = "");

  m.def("predict", [](const Eigen::VectorXd& mu, double tau, const std::string& model) {
    const Belief b = predict(as_belief(mu, tau), model_from(model).model);
    return py::make_tuple(b.mu, b.tau);
  }, py::arg("mu"), py::arg("tau"), py::arg("model") = "");

  m.def("update",
        [](const Eigen::VectorXd& mu, double tau, const std::string& action, const std::string& obs,
           double p_link, const std::string& model) {
          const ModelBundle mb = model_from(model);
          return update(as_belief(mu, tau), mb.actions.index_of(action), observation_from_string(obs),
                        p_link, mb.likelihood).mu;
        },
        py::arg("mu"), py::arg("tau"), py::arg("action"), py::arg("observation"), py::arg("p_link"),
        py::arg("model") = "");

  m.def("info_gain",
        [](const Eigen::VectorXd& mu, double tau, const std::string& action, double p_link,
           double lead_hours, const std::string& model) {
          const ModelBundle mb = model_from(model);
          return info_gain(as_belief(mu, tau), mb.actions.index_of(action), p_link, mb.likelihood,
                           mb.model, lead_hours);
        },
        py::arg("mu"), py::arg("tau"), py::arg("action"), py::arg("p_link"), py::arg("lead_hours") = 0.0,
        py::arg("model") = "");

  m.def("solve_json", [](const std::string& problem, const std::string& solver) {
    const Schedule s = solve(problem_from_json(json::parse(problem)), solver_from_string(solver));
    return to_json(s).dump();
  }, py::arg("problem"), py::arg("solver") = "exact");

  m.def("config_json", [](const std::string& path) { return load_config(path).source.dump(); },
        py::arg("path"));

  m.def("windows_csv", [](const std::string& path) {
    const SimConfig c = load_config(path);
    std::ostringstream out;
    write_windows(out, campaign_windows(c), c.model.actions);
    return out.str();
  }, py::arg("config"));

  m.def("run_campaign_json",
        [](const std::string& path, const std::string& planner, int trials, std::uint64_t seed,
           const std::string& solver, int jobs) {
          const SimConfig c = load_config(path);
          const auto windows = campaign_windows(c);
          CampaignOptions o;
          o.solver = solver_from_string(solver);
          o.jobs = jobs;
          CampaignResult r;
          {
            py::gil_scoped_release release;
            r = run_campaign(c, windows, planner_from_string(planner), trials, seed, o);
          }
          std::ostringstream metrics;
          write_metrics_csv(metrics, std::vector<CampaignResult>{r});
          json out = summary_json(r, c.model.modes);
          out["metrics_csv"] = metrics.str();
          return out.dump();
        },
        py::arg("config"), py::arg("planner") = "imm", py::arg("trials") = 1, py::arg("seed") = 1,
        py::arg("solver") = "exact", py::arg("jobs") = 1);
}
