#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvmeta/calendar.hpp"
#include "pvmeta/data.hpp"
#include "pvmeta/errors.hpp"

namespace pvmeta {

struct NormalizedDay {
  std::vector<double> values;  // in [0, 1]; max = 1 unless all_zero
  bool all_zero = false;
};

// Scale a day's generation by its peak. All-zero days pass through flagged so
// callers can decide whether they carry information.
inline NormalizedDay normalize_day(const std::vector<double>& watts) {
  NormalizedDay out;
  double peak = 0;
  for (double w : watts) peak = std::max(peak, w);
  if (peak <= 0) {
    out.values = watts;
    out.all_zero = true;
    return out;
  }
  out.values.reserve(watts.size());
  for (double w : watts) out.values.push_back(w / peak);
  return out;
}

enum class GroupingScheme { Monthly, IsoWeekly };

struct DayCorrelation {
  CivilDate date;
  double r = -std::numeric_limits<double>::infinity();  // -inf: no daylight or degenerate
};

struct DayGroup {
  std::string group_id;  // "YYYY-MM" or "YYYY-Wnn"
  std::vector<CivilDate> days;
  std::optional<CivilDate> prototypical_day;
  std::vector<double> prototype_profile;  // normalized generation of the chosen day
  bool prototype_all_zero = false;
  std::vector<DayCorrelation> correlations;
};

namespace detail {

inline std::string month_group_id(const CivilDate& d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d", d.year, d.month);
  return buf;
}

inline std::string week_group_id(const CivilDate& d) {
  IsoWeek w = iso_week(d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-W%02d", w.year, w.week);
  return buf;
}

// Pearson correlation; -inf when either series is constant or too short.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) return -std::numeric_limits<double>::infinity();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return -std::numeric_limits<double>::infinity();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

// Partition the profile's complete days (groups come back prototype-unset).
// Incomplete days are reported via the PreprocessResult, never silently lost.
inline std::vector<DayGroup> group_days(const PowerProfile& profile, GroupingScheme scheme,
                                        std::vector<CivilDate>* dropped_days = nullptr) {
  if (profile.samples.empty()) throw EmptyProfile("generation profile has no samples");
  const int n = profile.resolution_per_day;
  if (n <= 0) throw EmptyProfile("cannot determine sampling resolution of the profile");

  std::vector<DayGroup> groups;
  std::map<std::string, size_t> by_id;
  for (const DaySlice& slice : index_days(profile.samples)) {
    if (static_cast<int>(slice.end - slice.begin) != n) {
      if (dropped_days) dropped_days->push_back(slice.date);
      continue;
    }
    std::string id = scheme == GroupingScheme::Monthly ? detail::month_group_id(slice.date)
                                                       : detail::week_group_id(slice.date);
    auto [it, inserted] = by_id.emplace(id, groups.size());
    if (inserted) {
      groups.push_back({});
      groups.back().group_id = id;
    }
    groups[it->second].days.push_back(slice.date);
  }
  if (groups.empty()) throw EmptyProfile("no complete days to group");
  return groups;
}

// The day whose beam tracks its global irradiance most tightly, i.e. the
// clearest day of the group. Correlation runs over daylight samples only
// (zenith < 90 deg); nighttime zeros would inflate every day toward 1.
inline CivilDate select_prototypical_day(DayGroup& group,
                                         const std::vector<IrradianceRecord>& irradiance) {
  std::map<CivilDate, DaySlice> by_date;
  for (const DaySlice& s : index_days(irradiance)) by_date.emplace(s.date, s);

  group.correlations.clear();
  bool any_daylight = false;
  CivilDate best_date{};
  double best_r = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (const CivilDate& d : group.days) {
    DayCorrelation dc;
    dc.date = d;
    auto it = by_date.find(d);
    if (it != by_date.end()) {
      std::vector<double> dni, ghi;
      for (size_t i = it->second.begin; i < it->second.end; ++i) {
        if (irradiance[i].solar_zenith_deg < 90.0) {
          dni.push_back(irradiance[i].dni);
          ghi.push_back(irradiance[i].ghi);
        }
      }
      if (!dni.empty()) any_daylight = true;
      dc.r = detail::pearson(dni, ghi);
    }
    group.correlations.push_back(dc);
    // Strict > keeps the earliest date on ties (days are ascending).
    if (std::isfinite(dc.r) && (!have_best || dc.r > best_r)) {
      have_best = true;
      best_r = dc.r;
      best_date = d;
    }
  }
  if (!any_daylight)
    throw NoDaylightSamples("group " + group.group_id + " has no daylight irradiance samples");
  if (!have_best) {
    // Daylight exists but every correlation is degenerate (e.g. constant
    // series). Fall back to the earliest day rather than failing the group.
    best_date = group.days.front();
  }
  group.prototypical_day = best_date;
  return best_date;
}

struct PreprocessResult {
  std::vector<DayGroup> groups;
  std::vector<CivilDate> dropped_days;  // incomplete; excluded from grouping
  int resolution_per_day = 0;
};

// Full pipeline: group the days, pick each group's prototype, normalize it.
inline PreprocessResult preprocess(const PowerProfile& profile,
                                   const std::vector<IrradianceRecord>& irradiance,
                                   GroupingScheme scheme = GroupingScheme::Monthly) {
  PreprocessResult res;
  res.resolution_per_day = profile.resolution_per_day;
  res.groups = group_days(profile, scheme, &res.dropped_days);

  std::map<CivilDate, DaySlice> power_by_date;
  for (const DaySlice& s : index_days(profile.samples)) power_by_date.emplace(s.date, s);

  for (DayGroup& g : res.groups) {
    CivilDate d = select_prototypical_day(g, irradiance);
    const DaySlice& slice = power_by_date.at(d);
    std::vector<double> watts;
    watts.reserve(slice.end - slice.begin);
    for (size_t i = slice.begin; i < slice.end; ++i) watts.push_back(profile.samples[i].power_w);
    NormalizedDay nd = normalize_day(watts);
    g.prototype_profile = std::move(nd.values);
    g.prototype_all_zero = nd.all_zero;
  }
  return res;
}

inline nlohmann::json preprocess_report_json(const PreprocessResult& res) {
  nlohmann::json groups = nlohmann::json::array();
  for (const DayGroup& g : res.groups) {
    nlohmann::json corr = nlohmann::json::array();
    for (const DayCorrelation& dc : g.correlations) {
      nlohmann::json c;
      c["date"] = format_date(dc.date);
      if (std::isfinite(dc.r)) c["dni_ghi_correlation"] = dc.r;
      else c["dni_ghi_correlation"] = nullptr;  // no daylight or degenerate series
      corr.push_back(c);
    }
    nlohmann::json jg;
    jg["group_id"] = g.group_id;
    jg["day_count"] = g.days.size();
    jg["prototypical_day"] = g.prototypical_day ? format_date(*g.prototypical_day) : "";
    jg["prototype_all_zero"] = g.prototype_all_zero;
    jg["correlations"] = std::move(corr);
    groups.push_back(std::move(jg));
  }
  nlohmann::json dropped = nlohmann::json::array();
  for (const CivilDate& d : res.dropped_days) dropped.push_back(format_date(d));
  nlohmann::json out;
  out["resolution_per_day"] = res.resolution_per_day;
  out["groups"] = std::move(groups);
  out["dropped_days"] = std::move(dropped);
  return out;
}

}  // namespace pvmeta
