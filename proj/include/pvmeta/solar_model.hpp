#pragma once

#include <algorithm>
#include <cmath>

namespace pvmeta {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kRefIrradianceWm2 = 1000.0;

constexpr double deg2rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad2deg(double rad) { return rad * (180.0 / kPi); }

// Sun position as seen from the site. Azimuth is clockwise from north.
struct SolarPosition {
  double zenith_deg = 0.0;   // [0, 180)
  double azimuth_deg = 0.0;  // [0, 360)
};

// Fixed panel orientation: azimuth clockwise from north, tilt from horizontal.
struct SurfaceOrientation {
  double azimuth_deg = 0.0;  // gamma, [0, 360)
  double tilt_deg = 0.0;     // beta, [0, 90]
};

struct IrradianceComponents {
  double normal = 0.0;          // W/m^2, beam normal
  double sky_diffuse = 0.0;     // W/m^2
  double ground_diffuse = 0.0;  // W/m^2
};

struct PanelParams {
  double nameplate_w = 1000.0;
  double temp_coeff_per_c = 0.0;  // kappa, typically negative
  double ref_temp_c = 25.0;       // tau_r
  double derate = 1.0;            // zeta, (0, 1]
};

// Glass attenuation f(theta). The step model passes all beam below 90 deg;
// the ASHRAE variant applies the incidence-angle modifier 1 - b0*(1/cos - 1).
enum class AttenuationModel { Step, Ashrae };

struct AttenuationSpec {
  AttenuationModel model = AttenuationModel::Step;
  double ashrae_b0 = 0.05;
};

// Angle of incidence between the solar ray and the panel normal, degrees.
// theta = acos(sin(zen) cos(gamma - gamma_s) sin(beta) + cos(zen) cos(beta)).
inline double incidence_angle(const SolarPosition& sun, const SurfaceOrientation& surface) {
  const double zen = deg2rad(sun.zenith_deg);
  // Fold the azimuth difference into [0, 180] first so the result is exactly
  // symmetric in the sign of (gamma - gamma_s) and wraps at 360.
  const double dazi = std::fabs(std::remainder(surface.azimuth_deg - sun.azimuth_deg, 360.0));
  const double tilt = deg2rad(surface.tilt_deg);
  double c = std::sin(zen) * std::cos(deg2rad(dazi)) * std::sin(tilt) +
             std::cos(zen) * std::cos(tilt);
  c = std::clamp(c, -1.0, 1.0);
  return rad2deg(std::acos(c));
}

inline double attenuation_factor(double theta_deg, const AttenuationSpec& spec = {}) {
  if (theta_deg >= 90.0) return 0.0;
  switch (spec.model) {
    case AttenuationModel::Ashrae: {
      const double f = 1.0 - spec.ashrae_b0 * (1.0 / std::cos(deg2rad(theta_deg)) - 1.0);
      return std::clamp(f, 0.0, 1.0);
    }
    case AttenuationModel::Step:
    default:
      return 1.0;
  }
}

inline constexpr double kDefaultAlbedo = 0.2;

// Isotropic sky transposition: the tilted plane sees (1 + cos beta)/2 of the
// sky dome and (1 - cos beta)/2 of the ground.
inline double sky_diffuse_irradiance(double dhi_wm2, double tilt_deg) {
  return dhi_wm2 * (1.0 + std::cos(deg2rad(tilt_deg))) / 2.0;
}

inline double ground_diffuse_irradiance(double ghi_wm2, double tilt_deg,
                                        double albedo = kDefaultAlbedo) {
  return ghi_wm2 * albedo * (1.0 - std::cos(deg2rad(tilt_deg))) / 2.0;
}

// Transmitted plane-of-array irradiance, W/m^2. The beam term is clamped at
// zero so behind-panel geometry never subtracts from the diffuse floor.
inline double plane_of_array_irradiance(double theta_deg, const IrradianceComponents& irr,
                                        const AttenuationSpec& spec = {}) {
  const double beam = attenuation_factor(theta_deg, spec) * std::cos(deg2rad(theta_deg));
  return std::max(beam, 0.0) * irr.normal + irr.sky_diffuse + irr.ground_diffuse;
}

// AC power, watts. POA irradiance is normalized by the 1000 W/m^2 reference so
// the nameplate is realized exactly at reference conditions.
inline double ac_power(double poa_wm2, double cell_temp_c, const PanelParams& params) {
  const double p = params.derate * params.nameplate_w *
                   (1.0 + params.temp_coeff_per_c * (cell_temp_c - params.ref_temp_c)) *
                   (poa_wm2 / kRefIrradianceWm2);
  return std::max(p, 0.0);
}

}  // namespace pvmeta
