#include "immpc/geometry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <tuple>

namespace immpc {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kEarthRotationRadPerSec = 7.2921158553e-5;

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 satellite_eci(const OrbitSpec& o, UtcTime t) {
  const double r = kEarthRadiusKm + o.altitude_km;
  const double n = std::sqrt(kEarthMuKm3s2 / (r * r * r));
  const double dt = static_cast<double>(t.ms - o.epoch.ms) / 1000.0;
  const double u = o.arg_latitude_deg * kDeg + n * dt;
  const double raan = o.raan_deg * kDeg;
  const double inc = o.inclination_deg * kDeg;
  const double cu = std::cos(u), su = std::sin(u);
  const double cr = std::cos(raan), sr = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);
  return {r * (cr * cu - sr * su * ci), r * (sr * cu + cr * su * ci), r * su * si};
}

Vec3 station_eci(const GroundStation& g, UtcTime t) {
  const double r = kEarthRadiusKm + g.altitude_m / 1000.0;
  const double lat = g.latitude_deg * kDeg;
  const double lon = g.longitude_deg * kDeg + gmst_radians(t);
  return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

struct Pass {
  UtcTime start;
  UtcTime end;
  double e_max;
};

// Largest ms in [lo, hi] that is still on the `lo` side of the mask.
template <typename Above>
std::int64_t bisect(std::int64_t lo, std::int64_t hi, const Above& above, bool lo_state) {
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (above(mid) == lo_state) lo = mid;
    else hi = mid;
  }
  return lo;
}

std::vector<Pass> scan_passes(const OrbitSpec& orbit, const GroundStation& station,
                              Horizon h, double step_seconds) {
  std::vector<Pass> passes;
  if (h.end.ms <= h.begin.ms) return passes;
  const double mask = station.min_elevation_deg;
  auto elev = [&](std::int64_t ms) { return elevation_deg(orbit, station, UtcTime{ms}); };
  auto above = [&](std::int64_t ms) { return elev(ms) >= mask; };
  const auto step = std::max<std::int64_t>(1, std::llround(step_seconds * 1000.0));

  auto refine_peak = [&](std::int64_t lo, std::int64_t hi) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = static_cast<double>(lo), b = static_cast<double>(hi);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    auto f = [&](double x) { return elev(std::llround(x)); };
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 60 && b - a > 1.0; ++i) {
      if (fc > fd) {
        b = d; d = c; fd = fc;
        c = b - phi * (b - a); fc = f(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + phi * (b - a); fd = f(d);
      }
    }
    return std::max({f(a), f(b), f((a + b) / 2.0)});
  };

  const std::int64_t last = h.end.ms - 1;  // half-open horizon
  std::int64_t prev = h.begin.ms;
  bool in_pass = above(prev);
  std::int64_t start = prev;
  std::int64_t peak_t = prev;
  double peak = in_pass ? elev(prev) : -90.0;

  auto close = [&](std::int64_t end_ms) {
    const std::int64_t lo = std::max(start, peak_t - step);
    const std::int64_t hi = std::min(end_ms, peak_t + step);
    const double e_max = std::max(peak, refine_peak(lo, hi));
    if (end_ms > start) passes.push_back({UtcTime{start}, UtcTime{end_ms}, std::min(e_max, 90.0)});
  };

  for (std::int64_t t = h.begin.ms + step;; t += step) {
    const std::int64_t cur = std::min(t, last);
    const double e = elev(cur);
    const bool up = e >= mask;
    if (up && !in_pass) {
      start = bisect(prev, cur, above, false) + 1;
      peak = e;
      peak_t = cur;
      in_pass = true;
    } else if (up && in_pass) {
      if (e > peak) { peak = e; peak_t = cur; }
    } else if (!up && in_pass) {
      close(bisect(prev, cur, above, true));
      in_pass = false;
    }
    prev = cur;
    if (cur == last) break;
  }
  if (in_pass) close(h.end.ms);
  return passes;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void GroundStation::validate() const {
  if (std::abs(latitude_deg) > 90.0) throw std::invalid_argument("station '" + name + "': |latitude| > 90");
  if (std::abs(longitude_deg) > 180.0) throw std::invalid_argument("station '" + name + "': |longitude| > 180");
  if (!(min_elevation_deg > 0.0 && min_elevation_deg < 90.0))
    throw std::invalid_argument("station '" + name + "': elevation mask must lie in (0, 90)");
}

void OrbitSpec::validate() const {
  if (!(altitude_km > 0.0)) throw std::invalid_argument("orbit altitude must be positive");
  if (inclination_deg < 0.0 || inclination_deg > 180.0)
    throw std::invalid_argument("orbit inclination must lie in [0, 180]");
}

double OrbitSpec::period_seconds() const {
  const double r = kEarthRadiusKm + altitude_km;
  return 2.0 * std::numbers::pi * std::sqrt(r * r * r / kEarthMuKm3s2);
}

double gmst_radians(UtcTime t) {
  const double d = julian_date(t) - 2451545.0;
  double deg = std::fmod(280.46061837 + 360.98564736629 * d, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg * kDeg;
}

double elevation_deg(const OrbitSpec& orbit, const GroundStation& station, UtcTime t) {
  const Vec3 s = satellite_eci(orbit, t);
  const Vec3 g = station_eci(station, t);
  const Vec3 rho{s[0] - g[0], s[1] - g[1], s[2] - g[2]};
  const double gn = std::sqrt(dot(g, g));
  const double rn = std::sqrt(dot(rho, rho));
  const double sin_el = std::clamp(dot(rho, g) / (rn * gn), -1.0, 1.0);
  return std::asin(sin_el) / kDeg;
}

std::vector<ContactWindow> generate_windows(std::span<const OrbitSpec> orbits,
                                            std::span<const GroundStation> stations,
                                            Horizon horizon, double step_seconds,
                                            std::span<const ActionId> pass_actions) {
  if (!(step_seconds > 0.0) || step_seconds > 30.0)
    throw std::invalid_argument("scan step must lie in (0, 30] seconds");
  std::vector<ContactWindow> out;
  for (std::size_t a = 0; a < orbits.size(); ++a) {
    orbits[a].validate();
    for (const GroundStation& g : stations) {
      g.validate();
      for (const Pass& p : scan_passes(orbits[a], g, horizon, step_seconds)) {
        for (ActionId act : pass_actions) {
          ContactWindow w;
          w.asset = static_cast<int>(a);
          w.station = g.name;
          w.start = p.start;
          w.end = p.end;
          w.e_max_deg = p.e_max;
          w.action = act;
          out.push_back(std::move(w));
        }
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ContactWindow& x, const ContactWindow& y) {
    return std::tie(x.start, x.asset, x.station, x.action) <
           std::tie(y.start, y.asset, y.station, y.action);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

void write_windows(std::ostream& out, std::span<const ContactWindow> windows,
                   const ActionSet& actions) {
  out << kWindowCsvHeader << '\n';
  for (const ContactWindow& w : windows) {
    out << w.id << ',' << w.asset << ',' << w.station << ',' << format_iso8601(w.start) << ','
        << format_iso8601(w.end) << ',' << format_double(w.e_max_deg) << ','
        << actions[w.action].name << '\n';
  }
}

void write_windows(const std::filesystem::path& path, std::span<const ContactWindow> windows,
                   const ActionSet& actions) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_windows(f, windows, actions);
}

std::vector<ContactWindow> read_windows(std::istream& in, const ActionSet& actions,
                                        std::span<const GroundStation> stations) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw WindowParseError(1, "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kWindowCsvHeader)
    throw WindowParseError(lineno, std::string("expected header '") + kWindowCsvHeader + "'");

  auto parse_int = [&](const std::string& s, const char* field) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw WindowParseError(lineno, std::string("bad ") + field + " '" + s + "'");
    return v;
  };

  std::vector<ContactWindow> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7)
      throw WindowParseError(lineno, "expected 7 fields, got " + std::to_string(f.size()));
    ContactWindow w;
    w.id = parse_int(f[0], "id");
    w.asset = parse_int(f[1], "asset");
    w.station = f[2];
    try {
      w.start = parse_iso8601(f[3]);
      w.end = parse_iso8601(f[4]);
    } catch (const std::invalid_argument& e) {
      throw WindowParseError(lineno, e.what());
    }
    {
      const char* b = f[5].data();
      auto [p, ec] = std::from_chars(b, b + f[5].size(), w.e_max_deg);
      if (ec != std::errc() || p != b + f[5].size())
        throw WindowParseError(lineno, "bad e_max_deg '" + f[5] + "'");
    }
    const auto act = actions.find(f[6]);
    if (!act) throw WindowParseError(lineno, "unknown action '" + f[6] + "'");
    w.action = *act;

    if (w.station.empty()) throw WindowValidationError(lineno, "empty station name");
    if (w.asset < 0) throw WindowValidationError(lineno, "negative asset id");
    if (!(w.start < w.end)) throw WindowValidationError(lineno, "window " + f[0] + ": t_start must precede t_end");
    if (!(w.e_max_deg > 0.0 && w.e_max_deg <= 90.0))
      throw WindowValidationError(lineno, "window " + f[0] + ": e_max_deg must lie in (0, 90]");
    for (const GroundStation& g : stations) {
      if (g.name == w.station && w.e_max_deg < g.min_elevation_deg)
        throw WindowValidationError(lineno, "window " + f[0] + ": e_max below station mask");
    }
    out.push_back(std::move(w));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ContactWindow& a, const ContactWindow& b) { return a.start < b.start; });
  return out;
}

std::vector<ContactWindow> load_windows(const std::filesystem::path& path,
                                        const ActionSet& actions,
                                        std::span<const GroundStation> stations) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_windows(f, actions, stations);
}

}  // namespace immpc
