#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "immpc/observation_model.hpp"
#include "immpc/time.hpp"

namespace immpc {

inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kEarthMuKm3s2 = 398600.4418;

struct GroundStation {
  std::string name;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;
  double min_elevation_deg = 5.0;

  void validate() const;  // throws std::invalid_argument
};

// Circular orbit. arg_latitude_deg is the argument of latitude at epoch.
struct OrbitSpec {
  double altitude_km = 525.0;
  double inclination_deg = 97.4;
  double raan_deg = 0.0;
  double arg_latitude_deg = 0.0;
  UtcTime epoch{};

  void validate() const;
  double period_seconds() const;
};

struct ContactWindow {
  int id = 0;
  int asset = 0;
  std::string station;
  UtcTime start{};
  UtcTime end{};
  double e_max_deg = 0.0;
  ActionId action = 0;

  double duration_hours() const { return hours_between(start, end); }
  friend bool operator==(const ContactWindow&, const ContactWindow&) = default;
};

struct Horizon {
  UtcTime begin{};
  UtcTime end{};
};

double gmst_radians(UtcTime t);

// Elevation of the asset above the station's local horizontal, in degrees,
// for circular two-body motion over a spherical Earth rotating at the
// sidereal rate.
double elevation_deg(const OrbitSpec& orbit, const GroundStation& station, UtcTime t);

// Scans [begin, end) at `step_seconds` (<= 30), refines rise/set by bisection
// and the peak by golden-section search. Orbit index = asset id. Each pass
// yields one window per entry of `pass_actions`. Ids are assigned in
// (start, asset, station, action) order.
std::vector<ContactWindow> generate_windows(std::span<const OrbitSpec> orbits,
                                            std::span<const GroundStation> stations,
                                            Horizon horizon, double step_seconds,
                                            std::span<const ActionId> pass_actions);

class WindowParseError : public std::runtime_error {
 public:
  WindowParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class WindowValidationError : public std::runtime_error {
 public:
  WindowValidationError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kWindowCsvHeader = "id,asset,station,t_start,t_end,e_max_deg,action";

void write_windows(std::ostream& out, std::span<const ContactWindow> windows,
                   const ActionSet& actions);
void write_windows(const std::filesystem::path& path, std::span<const ContactWindow> windows,
                   const ActionSet& actions);

// Parses the window CSV; result is stably sorted by start time. When stations
// are given, e_max is checked against the station mask.
std::vector<ContactWindow> read_windows(std::istream& in, const ActionSet& actions,
                                        std::span<const GroundStation> stations = {});
std::vector<ContactWindow> load_windows(const std::filesystem::path& path,
                                        const ActionSet& actions,
                                        std::span<const GroundStation> stations = {});

}  // namespace immpc
