#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "immpc/rng.hpp"

namespace immpc {

using ModeId = int;
using ActionId = int;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an operation is called outside its documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class TimeUnit { hours, minutes };

// Uniform or point distribution on a bounded, nonnegative support. Values are
// held in their native unit; the *_hours accessors convert.
class BoundedDistribution {
 public:
  enum class Kind { uniform, point };

  static BoundedDistribution uniform(double lo, double hi, TimeUnit unit);
  static BoundedDistribution point(double value, TimeUnit unit);

  Kind kind() const { return kind_; }
  TimeUnit unit() const { return unit_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  double lower_hours() const { return to_hours(lo_); }
  double upper_hours() const { return to_hours(hi_); }

  double cdf(double x) const;
  double cdf_hours(double hours) const { return cdf(from_hours(hours)); }
  double sample(Rng& rng) const;
  double sample_hours(Rng& rng) const { return to_hours(sample(rng)); }

 private:
  BoundedDistribution(Kind k, double lo, double hi, TimeUnit u)
      : kind_(k), lo_(lo), hi_(hi), unit_(u) {}
  double to_hours(double v) const { return unit_ == TimeUnit::hours ? v : v / 60.0; }
  double from_hours(double h) const { return unit_ == TimeUnit::hours ? h : h * 60.0; }

  Kind kind_;
  double lo_;
  double hi_;
  TimeUnit unit_;
};

struct FaultMode {
  ModeId id = 0;
  std::string name;
  bool lethal = false;
  std::optional<BoundedDistribution> ttd;       // hours; present iff lethal
  std::optional<BoundedDistribution> recovery;  // minutes
  std::optional<double> alpha;                  // present iff lethal
  std::vector<ActionId> responsive_actions;

  bool responds_to(ActionId a) const;
};

class ModeSet {
 public:
  ModeSet() = default;
  // Throws ModelError when ids are not dense, the nominal/absorbing indices are
  // invalid, or a mode breaks the lethal <=> ttd <=> alpha coupling.
  ModeSet(std::vector<FaultMode> modes, ModeId ok, ModeId dead);

  std::size_t size() const { return modes_.size(); }
  const FaultMode& operator[](ModeId m) const { return modes_.at(static_cast<std::size_t>(m)); }
  const std::vector<FaultMode>& modes() const { return modes_; }
  ModeId ok() const { return ok_; }
  ModeId dead() const { return dead_; }
  std::optional<ModeId> find(std::string_view name) const;
  ModeId index_of(std::string_view name) const;  // throws ModelError

 private:
  std::vector<FaultMode> modes_;
  ModeId ok_ = 0;
  ModeId dead_ = 0;
};

// Time-inhomogeneous mode dynamics. `base` carries the tau-independent
// transition odds; the death column of lethal rows and the recovery gating are
// applied on top by transition_matrix().
class TransitionModel {
 public:
  TransitionModel() = default;
  TransitionModel(ModeSet modes, Eigen::MatrixXd base, double dt_hours);

  const ModeSet& modes() const { return modes_; }
  const Eigen::MatrixXd& base() const { return base_; }
  double dt() const { return dt_; }

 private:
  ModeSet modes_;
  Eigen::MatrixXd base_;
  double dt_ = 0.25;
};

// Every mode stays in place; used as the LEOP default base.
Eigen::MatrixXd persistent_base(const ModeSet& modes);

// Discrete-time hazard of the time-to-death distribution scaled by alpha.
// Past the end of the support the hazard is clamped to alpha.
double death_hazard(const FaultMode& mode, double tau_hours, double dt_hours);

Eigen::MatrixXd transition_matrix(const TransitionModel& model, double tau_hours);

struct Violation {
  enum class Kind { absorbing, monotonicity, gating, row_sum };
  Kind kind;
  ModeId mode;
  double tau;
  double tau_next;  // second grid point for monotonicity, else == tau
  std::string message;
};

using MatrixFn = std::function<Eigen::MatrixXd(double tau_hours)>;

std::vector<Violation> validate(const TransitionModel& model, std::span<const double> tau_grid);

// Same checks against an arbitrary tau -> matrix provider.
std::vector<Violation> validate(const ModeSet& modes, const MatrixFn& matrix,
                                std::span<const double> tau_grid);

const char* to_string(Violation::Kind k);

}  // namespace immpc
