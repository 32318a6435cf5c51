#pragma once

#include <cmath>

#include "pvmeta/calendar.hpp"
#include "pvmeta/solar_model.hpp"

namespace pvmeta {

struct Location {
  double latitude_deg = 0.0;   // north positive
  double longitude_deg = 0.0;  // east positive
};

// Sun zenith/azimuth from the NOAA "general solar position" approximation:
// a Fourier fit of declination and the equation of time in the fractional
// year, then the standard hour-angle conversion. Accurate to about 0.3 deg;
// documented target is +-1 deg against an ephemeris.
inline SolarPosition solar_position(const Location& loc, UnixTime t) {
  const CivilDate cd = date_of(t);
  const double hour_utc = hour_of_day(t);
  const double frac_year =
      2.0 * kPi / 365.0 * (day_of_year(cd) - 1 + (hour_utc - 12.0) / 24.0);

  const double g = frac_year;
  const double eqtime_min =
      229.18 * (0.000075 + 0.001868 * std::cos(g) - 0.032077 * std::sin(g) -
                0.014615 * std::cos(2 * g) - 0.040849 * std::sin(2 * g));
  const double decl =
      0.006918 - 0.399912 * std::cos(g) + 0.070257 * std::sin(g) -
      0.006758 * std::cos(2 * g) + 0.000907 * std::sin(2 * g) -
      0.002697 * std::cos(3 * g) + 0.00148 * std::sin(3 * g);  // radians

  // True solar time in minutes; input time is UTC so no zone offset term.
  const double tst_min = hour_utc * 60.0 + eqtime_min + 4.0 * loc.longitude_deg;
  double hour_angle_deg = tst_min / 4.0 - 180.0;
  hour_angle_deg = std::remainder(hour_angle_deg, 360.0);

  const double lat = deg2rad(loc.latitude_deg);
  const double ha = deg2rad(hour_angle_deg);
  const double cos_zen = std::sin(lat) * std::sin(decl) +
                         std::cos(lat) * std::cos(decl) * std::cos(ha);
  const double zenith = rad2deg(std::acos(std::clamp(cos_zen, -1.0, 1.0)));

  // atan2 form, measured from south (west positive), then shifted to
  // clockwise-from-north.
  const double az_south = std::atan2(std::sin(ha), std::cos(ha) * std::sin(lat) -
                                                       std::tan(decl) * std::cos(lat));
  double azimuth = std::fmod(rad2deg(az_south) + 180.0, 360.0);
  if (azimuth < 0) azimuth += 360.0;

  return SolarPosition{zenith, azimuth};
}

}  // namespace pvmeta
