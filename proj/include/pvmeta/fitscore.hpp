#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pvmeta/data.hpp"
#include "pvmeta/errors.hpp"
#include "pvmeta/io_util.hpp"
#include "pvmeta/preprocess.hpp"
#include "pvmeta/solar_model.hpp"

namespace pvmeta {

// Discretized candidate domain: the cross product of azimuth and tilt values.
// Points are ordered azimuth-major, so the first linear index attaining a
// maximum is also the lexicographically smallest (azimuth, tilt) pair.
struct DomainGrid {
  std::vector<double> azimuth_values;  // ascending, within [0, 360)
  std::vector<double> tilt_values;     // ascending, within [0, 90]

  size_t size() const { return azimuth_values.size() * tilt_values.size(); }

  SurfaceOrientation point(size_t idx) const {
    const size_t nt = tilt_values.size();
    return {azimuth_values[idx / nt], tilt_values[idx % nt]};
  }

  // Regular grid, half-open in both dimensions: azimuth 0, a, 2a, ... < 360
  // and tilt 0, b, 2b, ... < 90. Steps of 1 degree give 360 x 90 = 32,400.
  static DomainGrid regular(double az_step, double tilt_step) {
    if (az_step <= 0 || tilt_step <= 0)
      throw InvalidConfig("grid steps must be positive");
    DomainGrid g;
    for (size_t i = 0; i * az_step < 360.0 - 1e-9; ++i)
      g.azimuth_values.push_back(static_cast<double>(i) * az_step);
    for (size_t i = 0; i * tilt_step < 90.0 - 1e-9; ++i)
      g.tilt_values.push_back(static_cast<double>(i) * tilt_step);
    if (g.size() < 2) throw InvalidConfig("domain grid must contain at least 2 points");
    return g;
  }
};

// Normalized plane-of-array irradiance profile a panel with orientation
// `surface` would see across one day of weather. The shape, not the level,
// carries the information, so the day is max-normalized exactly like the
// observed generation.
inline NormalizedDay candidate_profile(const SurfaceOrientation& surface,
                                       const IrradianceRecord* day, size_t n,
                                       const AttenuationSpec& spec = {}) {
  std::vector<double> poa;
  poa.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const IrradianceRecord& r = day[i];
    SolarPosition sun{r.solar_zenith_deg, r.solar_azimuth_deg};
    IrradianceComponents comps;
    comps.normal = r.dni;
    comps.sky_diffuse = sky_diffuse_irradiance(r.dhi, surface.tilt_deg);
    comps.ground_diffuse = ground_diffuse_irradiance(r.ghi, surface.tilt_deg);
    poa.push_back(plane_of_array_irradiance(incidence_angle(sun, surface), comps, spec));
  }
  return normalize_day(poa);
}

inline NormalizedDay candidate_profile(const SurfaceOrientation& surface,
                                       const std::vector<IrradianceRecord>& day,
                                       const AttenuationSpec& spec = {}) {
  return candidate_profile(surface, day.data(), day.size(), spec);
}

// Negative mean squared distance between two normalized day profiles; 0 is a
// perfect match and every mismatch pushes the score below zero.
inline double group_score(const std::vector<double>& prototype,
                          const std::vector<double>& candidate) {
  if (prototype.size() != candidate.size())
    throw LengthMismatch("profile length mismatch: " + std::to_string(prototype.size()) +
                         " vs " + std::to_string(candidate.size()));
  if (prototype.empty()) throw LengthMismatch("empty profiles have no score");
  double ss = 0;
  for (size_t i = 0; i < prototype.size(); ++i) {
    const double d = candidate[i] - prototype[i];
    ss += d * d;
  }
  return -ss / static_cast<double>(prototype.size());
}

// Everything fit_score needs, resolved once: each group's prototype vector
// alongside the weather of its prototypical day.
struct ScoreContext {
  struct GroupDay {
    std::string group_id;
    std::vector<IrradianceRecord> day;
    std::vector<double> prototype;
  };
  std::vector<GroupDay> groups;
  AttenuationSpec attenuation;

  static ScoreContext build(const PreprocessResult& pre,
                            const std::vector<IrradianceRecord>& irradiance,
                            const AttenuationSpec& spec = {}) {
    std::map<CivilDate, DaySlice> by_date;
    for (const DaySlice& s : index_days(irradiance)) by_date.emplace(s.date, s);
    ScoreContext ctx;
    ctx.attenuation = spec;
    for (const DayGroup& g : pre.groups) {
      if (!g.prototypical_day)
        throw EmptyProfile("group " + g.group_id + " has no prototypical day selected");
      auto it = by_date.find(*g.prototypical_day);
      if (it == by_date.end())
        throw EmptyProfile("no irradiance data for prototypical day " +
                           format_date(*g.prototypical_day));
      GroupDay gd;
      gd.group_id = g.group_id;
      gd.day.assign(irradiance.begin() + static_cast<long>(it->second.begin),
                    irradiance.begin() + static_cast<long>(it->second.end));
      gd.prototype = g.prototype_profile;
      ctx.groups.push_back(std::move(gd));
    }
    return ctx;
  }
};

// Sum of per-group scores: the objective maximized by both the exhaustive
// search and the Bayesian loop.
inline double fit_score(const SurfaceOrientation& surface, const ScoreContext& ctx) {
  double total = 0;
  for (const auto& g : ctx.groups)
    total += group_score(g.prototype, candidate_profile(surface, g.day, ctx.attenuation).values);
  return total;
}

struct FitScoreTable {
  DomainGrid grid;
  std::vector<std::string> group_ids;
  std::vector<std::vector<double>> per_group_scores;  // [group][point]
  std::vector<double> total_scores;                   // [point]
  size_t argmax_index = 0;

  SurfaceOrientation argmax() const { return grid.point(argmax_index); }
};

// Brute-force evaluation of every grid point; doubles as the ground-truth
// oracle when validating the Bayesian search.
inline FitScoreTable grid_search(const DomainGrid& grid, const ScoreContext& ctx) {
  FitScoreTable t;
  t.grid = grid;
  const size_t n = grid.size();
  t.total_scores.assign(n, 0.0);
  for (const auto& g : ctx.groups) t.group_ids.push_back(g.group_id);
  t.per_group_scores.assign(ctx.groups.size(), std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    const SurfaceOrientation lam = grid.point(i);
    double total = 0;
    for (size_t gi = 0; gi < ctx.groups.size(); ++gi) {
      const auto& g = ctx.groups[gi];
      const double s =
          group_score(g.prototype, candidate_profile(lam, g.day, ctx.attenuation).values);
      t.per_group_scores[gi][i] = s;
      total += s;
    }
    t.total_scores[i] = total;
    if (t.total_scores[i] > t.total_scores[t.argmax_index]) t.argmax_index = i;
  }
  return t;
}

// CSV surface export for external plotting: azimuth_deg,tilt_deg,fit_score.
inline std::string score_surface_csv(const FitScoreTable& t, const std::string& meta_comment = "") {
  std::ostringstream out;
  if (!meta_comment.empty()) out << "# " << meta_comment << "\n";
  out << "azimuth_deg,tilt_deg,fit_score\n";
  for (size_t i = 0; i < t.total_scores.size(); ++i) {
    const SurfaceOrientation p = t.grid.point(i);
    out << fmt_double(p.azimuth_deg) << ',' << fmt_double(p.tilt_deg) << ','
        << fmt_double(t.total_scores[i]) << '\n';
  }
  return out.str();
}

}  // namespace pvmeta
