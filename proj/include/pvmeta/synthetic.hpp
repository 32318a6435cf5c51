#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvmeta/calendar.hpp"
#include "pvmeta/data.hpp"
#include "pvmeta/errors.hpp"
#include "pvmeta/solar_model.hpp"
#include "pvmeta/solar_position.hpp"

namespace pvmeta {

// Per-day sky condition. Attenuation c ∈ [0, 1]: 0 = clear, 1 = beam fully blocked.
struct CloudModel {
  enum class Kind { Clear, Random, Pattern };
  Kind kind = Kind::Clear;
  double min_attenuation = 0;            // Random: uniform draw bounds
  double max_attenuation = 0.8;
  std::vector<double> attenuation;       // Pattern: cycled over days in order
};

// Sinusoidal air temperature, peaking mid-afternoon local solar time.
struct AirTempModel {
  double base_c = 15;
  double amplitude_c = 8;
  double peak_hour = 14;  // local solar hours
};

struct SyntheticScenario {
  std::string site_id = "synthetic";
  Location location;
  CivilDate start_date;
  CivilDate end_date;         // inclusive
  int step_minutes = 60;
  SurfaceOrientation ground_truth;
  PanelParams panel;
  double noise_std = 0;       // relative (multiplicative) noise
  CloudModel clouds;
  AirTempModel air_temp;
  std::uint64_t rng_seed = 0;
};

// --- clear-sky model ---------------------------------------------------------
// Haurwitz global horizontal shape, split by a fixed 0.15 diffuse fraction.
// Only the relative shape matters downstream; absolute level cancels in the
// per-day normalization.

inline constexpr double kDiffuseFraction = 0.15;

struct ClearSky {
  double ghi = 0, dni = 0, dhi = 0;
};

inline ClearSky clear_sky(double zenith_deg) {
  ClearSky c;
  double cz = std::cos(deg2rad(zenith_deg));
  if (cz <= 0) return c;
  c.ghi = 1098.0 * cz * std::exp(-0.059 / cz);
  c.dhi = kDiffuseFraction * c.ghi;
  c.dni = (c.ghi - c.dhi) / cz;
  return c;
}

// --- scenario JSON -----------------------------------------------------------

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* name,
                                           const char* ctx) {
  auto it = j.find(name);
  if (it == j.end())
    throw InvalidScenario(std::string("missing required field '") + name + "' in " + ctx);
  return *it;
}

inline double number_field(const nlohmann::json& j, const char* name, const char* ctx) {
  const auto& v = require_field(j, name, ctx);
  if (!v.is_number())
    throw InvalidScenario(std::string("field '") + name + "' in " + ctx + " must be a number");
  return v.get<double>();
}

inline CivilDate date_field(const nlohmann::json& j, const char* name, const char* ctx) {
  const auto& v = require_field(j, name, ctx);
  if (!v.is_string())
    throw InvalidScenario(std::string("field '") + name + "' in " + ctx +
                          " must be a YYYY-MM-DD string");
  auto d = parse_date(v.get<std::string>());
  if (!d)
    throw InvalidScenario(std::string("field '") + name + "' in " + ctx +
                          " is not a valid date: '" + v.get<std::string>() + "'");
  return *d;
}

}  // namespace detail

inline SyntheticScenario parse_scenario(const nlohmann::json& j) {
  using detail::date_field;
  using detail::number_field;
  using detail::require_field;
  if (!j.is_object()) throw InvalidScenario("scenario document must be a JSON object");

  SyntheticScenario s;
  if (auto it = j.find("site_id"); it != j.end()) s.site_id = it->get<std::string>();

  const auto& loc = require_field(j, "location", "scenario");
  s.location.latitude_deg = number_field(loc, "latitude_deg", "location");
  s.location.longitude_deg = number_field(loc, "longitude_deg", "location");
  if (s.location.latitude_deg < -90 || s.location.latitude_deg > 90)
    throw InvalidScenario("location.latitude_deg out of range [-90, 90]");

  s.start_date = date_field(j, "start_date", "scenario");
  s.end_date = date_field(j, "end_date", "scenario");
  if (s.end_date < s.start_date) throw InvalidScenario("end_date precedes start_date");

  if (auto it = j.find("step_minutes"); it != j.end()) s.step_minutes = it->get<int>();
  if (s.step_minutes <= 0 || 1440 % s.step_minutes != 0)
    throw InvalidScenario("step_minutes must be a positive divisor of 1440");

  const auto& gt = require_field(j, "ground_truth", "scenario");
  s.ground_truth.azimuth_deg = number_field(gt, "azimuth_deg", "ground_truth");
  s.ground_truth.tilt_deg = number_field(gt, "tilt_deg", "ground_truth");
  if (s.ground_truth.azimuth_deg < 0 || s.ground_truth.azimuth_deg >= 360)
    throw InvalidScenario("ground_truth.azimuth_deg out of range [0, 360)");
  if (s.ground_truth.tilt_deg < 0 || s.ground_truth.tilt_deg > 90)
    throw InvalidScenario("ground_truth.tilt_deg out of range [0, 90]");
  if (auto it = gt.find("nameplate_w"); it != gt.end()) s.panel.nameplate_w = it->get<double>();
  if (auto it = gt.find("temp_coeff_per_c"); it != gt.end())
    s.panel.temp_coeff_per_c = it->get<double>();
  if (auto it = gt.find("ref_temp_c"); it != gt.end()) s.panel.ref_temp_c = it->get<double>();
  if (auto it = gt.find("derate"); it != gt.end()) s.panel.derate = it->get<double>();
  if (s.panel.nameplate_w <= 0) throw InvalidScenario("ground_truth.nameplate_w must be > 0");
  if (s.panel.derate <= 0 || s.panel.derate > 1)
    throw InvalidScenario("ground_truth.derate must be in (0, 1]");

  if (auto it = j.find("noise_std"); it != j.end()) s.noise_std = it->get<double>();
  if (s.noise_std < 0) throw InvalidScenario("noise_std must be >= 0");

  if (auto it = j.find("cloud_model"); it != j.end()) {
    const auto& cm = *it;
    std::string kind = require_field(cm, "kind", "cloud_model").get<std::string>();
    if (kind == "clear") {
      s.clouds.kind = CloudModel::Kind::Clear;
    } else if (kind == "random") {
      s.clouds.kind = CloudModel::Kind::Random;
      if (auto f = cm.find("min_attenuation"); f != cm.end())
        s.clouds.min_attenuation = f->get<double>();
      if (auto f = cm.find("max_attenuation"); f != cm.end())
        s.clouds.max_attenuation = f->get<double>();
      if (s.clouds.min_attenuation < 0 || s.clouds.max_attenuation > 1 ||
          s.clouds.min_attenuation > s.clouds.max_attenuation)
        throw InvalidScenario("cloud_model attenuation bounds must satisfy 0 <= min <= max <= 1");
    } else if (kind == "pattern") {
      s.clouds.kind = CloudModel::Kind::Pattern;
      const auto& arr = require_field(cm, "attenuation", "cloud_model");
      if (!arr.is_array() || arr.empty())
        throw InvalidScenario("cloud_model.attenuation must be a non-empty array");
      for (const auto& v : arr) {
        double a = v.get<double>();
        if (a < 0 || a > 1) throw InvalidScenario("cloud_model.attenuation values must be in [0, 1]");
        s.clouds.attenuation.push_back(a);
      }
    } else {
      throw InvalidScenario("cloud_model.kind must be one of: clear, random, pattern");
    }
  }

  if (auto it = j.find("air_temp"); it != j.end()) {
    const auto& at = *it;
    if (auto f = at.find("base_c"); f != at.end()) s.air_temp.base_c = f->get<double>();
    if (auto f = at.find("amplitude_c"); f != at.end()) s.air_temp.amplitude_c = f->get<double>();
    if (auto f = at.find("peak_hour"); f != at.end()) s.air_temp.peak_hour = f->get<double>();
  }

  if (auto it = j.find("rng_seed"); it != j.end()) s.rng_seed = it->get<std::uint64_t>();
  return s;
}

inline SyntheticScenario parse_scenario_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw InvalidScenario("scenario document is not valid JSON");
  try {
    return parse_scenario(j);
  } catch (const InvalidScenario&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScenario(std::string("scenario field has wrong type: ") + e.what());
  }
}

// --- synthesis ---------------------------------------------------------------

namespace detail {

inline double diurnal_air_temp(const AirTempModel& m, double local_solar_hour) {
  return m.base_c +
         m.amplitude_c * std::cos(2.0 * kPi * (local_solar_hour - m.peak_hour) / 24.0);
}

}  // namespace detail

// Generates the weather file and the matching AC power trace for one scenario.
// One RNG drives everything: a per-day cloud draw, then per-sample noise, in
// strict time order, so a seed pins the whole dataset.
inline std::pair<std::vector<IrradianceRecord>, PowerProfile> synthesize(
    const SyntheticScenario& s) {
  std::vector<IrradianceRecord> irr;
  PowerProfile gen;
  gen.site_id = s.site_id;
  gen.location = s.location;
  gen.resolution_per_day = 1440 / s.step_minutes;

  std::mt19937_64 rng(s.rng_seed);
  std::uniform_real_distribution<double> unif(s.clouds.min_attenuation, s.clouds.max_attenuation);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int steps_per_day = 1440 / s.step_minutes;
  long day_index = 0;
  for (CivilDate d = s.start_date;; d = date_of(to_unix(d) + 86400), ++day_index) {
    double cloud = 0;
    switch (s.clouds.kind) {
      case CloudModel::Kind::Clear: break;
      case CloudModel::Kind::Random: cloud = unif(rng); break;
      case CloudModel::Kind::Pattern:
        cloud = s.clouds.attenuation[static_cast<size_t>(day_index) % s.clouds.attenuation.size()];
        break;
    }
    UnixTime day_start = to_unix(d);
    for (int k = 0; k < steps_per_day; ++k) {
      UnixTime t = day_start + static_cast<UnixTime>(k) * 60 * s.step_minutes;
      SolarPosition sun = solar_position(s.location, t);
      ClearSky cs = clear_sky(sun.zenith_deg);
      double cz = std::cos(deg2rad(sun.zenith_deg));

      IrradianceRecord r;
      r.timestamp = t;
      r.solar_zenith_deg = sun.zenith_deg;
      r.solar_azimuth_deg = sun.azimuth_deg;
      // Clouds remove beam; a fixed fraction of the blocked beam rescatters
      // into the diffuse component. GHI stays internally consistent.
      r.dni = (1.0 - cloud) * cs.dni;
      r.dhi = cs.dhi + 0.4 * cloud * cs.dni * std::max(cz, 0.0);
      r.ghi = r.dni * std::max(cz, 0.0) + r.dhi;
      double local_solar_hour =
          std::fmod(static_cast<double>(second_of_day(t)) / 3600.0 +
                        s.location.longitude_deg / 15.0 + 48.0,
                    24.0);
      r.air_temp_c = detail::diurnal_air_temp(s.air_temp, local_solar_hour);
      irr.push_back(r);

      IrradianceComponents comps;
      comps.normal = r.dni;
      comps.sky_diffuse = sky_diffuse_irradiance(r.dhi, s.ground_truth.tilt_deg);
      comps.ground_diffuse = ground_diffuse_irradiance(r.ghi, s.ground_truth.tilt_deg);
      double theta = incidence_angle(sun, s.ground_truth);
      double poa = plane_of_array_irradiance(theta, comps, AttenuationSpec{});
      double p = ac_power(poa, r.air_temp_c, s.panel);
      if (s.noise_std > 0) p = std::max(0.0, p * (1.0 + s.noise_std * gauss(rng)));
      gen.samples.push_back({t, p});
    }
    if (d == s.end_date) break;
  }
  return {irr, gen};
}

}  // namespace pvmeta
