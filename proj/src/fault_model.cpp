#include "immpc/fault_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace immpc {

BoundedDistribution BoundedDistribution::uniform(double lo, double hi, TimeUnit unit) {
  if (!(lo >= 0.0) || !(lo < hi) || !std::isfinite(hi))
    throw ModelError("uniform distribution requires 0 <= lo < hi < inf");
  return BoundedDistribution(Kind::uniform, lo, hi, unit);
}

BoundedDistribution BoundedDistribution::point(double value, TimeUnit unit) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw ModelError("point distribution requires a finite nonnegative value");
  return BoundedDistribution(Kind::point, value, value, unit);
}

double BoundedDistribution::cdf(double x) const {
  if (kind_ == Kind::point) return x >= lo_ ? 1.0 : 0.0;
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  return (x - lo_) / (hi_ - lo_);
}

double BoundedDistribution::sample(Rng& rng) const {
  if (kind_ == Kind::point) return lo_;
  return immpc::uniform(rng, lo_, hi_);
}

bool FaultMode::responds_to(ActionId a) const {
  return std::find(responsive_actions.begin(), responsive_actions.end(), a) !=
         responsive_actions.end();
}

ModeSet::ModeSet(std::vector<FaultMode> modes, ModeId ok, ModeId dead)
    : modes_(std::move(modes)), ok_(ok), dead_(dead) {
  const auto n = static_cast<ModeId>(modes_.size());
  if (n < 2) throw ModelError("mode set needs at least a nominal and an absorbing mode");
  for (ModeId i = 0; i < n; ++i) {
    const FaultMode& m = modes_[static_cast<std::size_t>(i)];
    if (m.id != i) throw ModelError("mode ids must be dense 0..|M|-1 (mode '" + m.name + "')");
    if (m.lethal != m.ttd.has_value() || m.lethal != m.alpha.has_value())
      throw ModelError("mode '" + m.name + "': lethal requires both ttd and alpha, and only then");
    if (m.alpha && !(*m.alpha > 0.0 && *m.alpha < 1.0))
      throw ModelError("mode '" + m.name + "': alpha must lie in (0,1)");
  }
  if (ok < 0 || ok >= n || dead < 0 || dead >= n || ok == dead)
    throw ModelError("nominal and absorbing modes must be distinct valid indices");
  if (modes_[static_cast<std::size_t>(ok)].lethal) throw ModelError("nominal mode cannot be lethal");
  const FaultMode& d = modes_[static_cast<std::size_t>(dead)];
  if (d.lethal || d.ttd || d.recovery)
    throw ModelError("absorbing mode cannot carry distributions");
}

std::optional<ModeId> ModeSet::find(std::string_view name) const {
  for (const auto& m : modes_)
    if (m.name == name) return m.id;
  return std::nullopt;
}

ModeId ModeSet::index_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw ModelError("unknown mode '" + std::string(name) + "'");
}

TransitionModel::TransitionModel(ModeSet modes, Eigen::MatrixXd base, double dt_hours)
    : modes_(std::move(modes)), base_(std::move(base)), dt_(dt_hours) {
  const auto n = static_cast<Eigen::Index>(modes_.size());
  if (base_.rows() != n || base_.cols() != n)
    throw ModelError("base transition matrix must be |M| x |M|");
  if (!(dt_ > 0.0)) throw ModelError("dt must be positive");
  for (Eigen::Index r = 0; r < n; ++r) {
    if ((base_.row(r).array() < 0.0).any())
      throw ModelError("base transition matrix has a negative entry in row " + std::to_string(r));
    if (std::abs(base_.row(r).sum() - 1.0) > 1e-9)
      throw ModelError("base transition row " + std::to_string(r) + " does not sum to 1");
  }
}

Eigen::MatrixXd persistent_base(const ModeSet& modes) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  return Eigen::MatrixXd::Identity(n, n);
}

double death_hazard(const FaultMode& mode, double tau, double dt) {
  if (!mode.lethal || !mode.ttd || !mode.alpha)
    throw ContractViolation("death_hazard called on non-lethal mode '" + mode.name + "'");
  if (tau < 0.0 || !(dt > 0.0)) throw ContractViolation("death_hazard requires tau >= 0, dt > 0");
  const double alpha = *mode.alpha;
  const BoundedDistribution& ttd = *mode.ttd;
  if (tau >= ttd.upper_hours()) return alpha;
  const double f0 = ttd.cdf_hours(tau);
  const double survival = 1.0 - f0;
  if (survival <= 0.0) return alpha;
  const double h = alpha * (ttd.cdf_hours(tau + dt) - f0) / survival;
  return std::clamp(h, 0.0, alpha);
}

Eigen::MatrixXd transition_matrix(const TransitionModel& model, double tau) {
  const ModeSet& modes = model.modes();
  const auto n = static_cast<Eigen::Index>(modes.size());
  const ModeId ok = modes.ok();
  const ModeId dead = modes.dead();
  Eigen::MatrixXd pi = model.base();

  for (Eigen::Index r = 0; r < n; ++r) {
    auto row = pi.row(r);
    if (r == dead) {
      row.setZero();
      row(dead) = 1.0;
      continue;
    }
    const FaultMode& mode = modes[static_cast<ModeId>(r)];
    if (mode.lethal) {
      const double d = death_hazard(mode, tau, model.dt());
      row(dead) = 0.0;
      const double rest = row.sum();
      if (rest > 0.0) {
        row *= (1.0 - d) / rest;
      } else {
        row(r) = 1.0 - d;
      }
      row(dead) = d;
    }
    if (mode.recovery && r != ok && tau < mode.recovery->lower_hours()) {
      row(r) += row(ok);
      row(ok) = 0.0;
    }
  }
  return pi;
}

const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::absorbing: return "absorbing";
    case Violation::Kind::monotonicity: return "monotonicity";
    case Violation::Kind::gating: return "gating";
    case Violation::Kind::row_sum: return "row_sum";
  }
  return "?";
}

std::vector<Violation> validate(const ModeSet& modes, const MatrixFn& matrix,
                                std::span<const double> grid) {
  constexpr double kTol = 1e-12;
  std::vector<Violation> out;
  const auto n = static_cast<Eigen::Index>(modes.size());
  const ModeId ok = modes.ok();
  const ModeId dead = modes.dead();
  auto push = [&](Violation::Kind k, ModeId m, double t0, double t1, const std::string& msg) {
    out.push_back(Violation{k, m, t0, t1, msg});
  };

  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(grid.size());
  for (double tau : grid) mats.push_back(matrix(tau));

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double tau = grid[g];
    const Eigen::MatrixXd& pi = mats[g];
    std::ostringstream where;
    where << " at tau=" << tau << " h";

    for (Eigen::Index c = 0; c < n; ++c) {
      const double want = c == dead ? 1.0 : 0.0;
      if (std::abs(pi(dead, c) - want) > kTol) {
        push(Violation::Kind::absorbing, dead, tau, tau, "dead row is not absorbing" + where.str());
        break;
      }
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const double s = pi.row(r).sum();
      if (std::abs(s - 1.0) > kTol || (pi.row(r).array() < -kTol).any())
        push(Violation::Kind::row_sum, static_cast<ModeId>(r), tau, tau,
             "row '" + modes[static_cast<ModeId>(r)].name + "' is not stochastic" + where.str());
    }
    for (const FaultMode& m : modes.modes()) {
      if (m.id == ok || !m.recovery) continue;
      if (tau < m.recovery->lower_hours() && pi(m.id, ok) > 0.0)
        push(Violation::Kind::gating, m.id, tau, tau,
             "mode '" + m.name + "' recovers before its minimum recovery time" + where.str());
    }
  }

  for (const FaultMode& m : modes.modes()) {
    if (!m.lethal) continue;
    for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
      const double a = mats[g](m.id, dead);
      const double b = mats[g + 1](m.id, dead);
      if (b < a - kTol) {
        std::ostringstream msg;
        msg << "death probability of '" << m.name << "' decreases from tau=" << grid[g]
            << " h to tau=" << grid[g + 1] << " h (" << a << " -> " << b << ")";
        push(Violation::Kind::monotonicity, m.id, grid[g], grid[g + 1], msg.str());
      }
    }
  }
  return out;
}

std::vector<Violation> validate(const TransitionModel& model, std::span<const double> grid) {
  return validate(model.modes(), [&](double tau) { return transition_matrix(model, tau); }, grid);
}

}  // namespace immpc
