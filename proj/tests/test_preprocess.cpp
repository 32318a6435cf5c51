#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "pvmeta/preprocess.hpp"
#include "pvmeta/synthetic.hpp"

using namespace pvmeta;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// In-test correlation oracle, written against the textbook definition rather
// than the library helper.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Hourly profile covering [start, start + n_days) with per-day watt vectors.
PowerProfile hourly_profile(const CivilDate& start, const std::vector<std::vector<double>>& days) {
  PowerProfile p;
  p.resolution_per_day = 24;
  UnixTime t0 = to_unix(start);
  for (size_t d = 0; d < days.size(); ++d)
    for (size_t h = 0; h < days[d].size(); ++h)
      p.samples.push_back({t0 + static_cast<UnixTime>(d) * 86400 + static_cast<UnixTime>(h) * 3600,
                           days[d][h]});
  return p;
}

// Hourly irradiance where one chosen day tracks dni against ghi perfectly and
// the rest deliberately decorrelate the pair.
std::vector<IrradianceRecord> irradiance_days(const CivilDate& start, int n_days, int clear_day) {
  std::vector<IrradianceRecord> recs;
  UnixTime t0 = to_unix(start);
  for (int d = 0; d < n_days; ++d) {
    for (int h = 0; h < 24; ++h) {
      IrradianceRecord r;
      r.timestamp = t0 + static_cast<UnixTime>(d) * 86400 + static_cast<UnixTime>(h) * 3600;
      const bool daylight = h >= 6 && h <= 18;
      r.solar_zenith_deg = daylight ? 40.0 : 120.0;
      r.solar_azimuth_deg = 180.0;
      if (daylight) {
        const double shape = std::sin(kPi * (h - 6) / 12.0);
        if (d == clear_day) {
          r.dni = 800.0 * shape;
          r.ghi = 600.0 * shape + 50.0;
        } else {
          // zig-zag dni against a smooth ghi: correlation well below 1
          r.dni = (h % 2 == 0) ? 700.0 : 100.0;
          r.ghi = 600.0 * shape + 50.0;
        }
        r.dhi = 50.0;
      }
      recs.push_back(r);
    }
  }
  return recs;
}

}  // namespace

TEST(NormalizeDay, ScalesByThePeak) {
  const NormalizedDay nd = normalize_day({2.0, 4.0, 1.0});
  EXPECT_FALSE(nd.all_zero);
  ASSERT_EQ(nd.values.size(), 3u);
  EXPECT_DOUBLE_EQ(nd.values[0], 0.5);
  EXPECT_DOUBLE_EQ(nd.values[1], 1.0);
  EXPECT_DOUBLE_EQ(nd.values[2], 0.25);
}

TEST(NormalizeDay, AllZeroDaysAreFlagged) {
  const NormalizedDay nd = normalize_day({0.0, 0.0, 0.0});
  EXPECT_TRUE(nd.all_zero);
  EXPECT_EQ(nd.values, (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(NormalizeDay, IdempotentAndScaleInvariant) {
  const std::vector<double> day{10.0, 55.0, 20.0, 0.0};
  const NormalizedDay once = normalize_day(day);
  const NormalizedDay twice = normalize_day(once.values);
  EXPECT_EQ(once.values, twice.values);
  std::vector<double> scaled;
  for (double w : day) scaled.push_back(w * 137.0);
  EXPECT_EQ(normalize_day(scaled).values, once.values);
}

TEST(Pearson, MatchesIndependentFormula) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 1, 4, 3, 6};
  EXPECT_NEAR(detail::pearson(x, y), pearson_oracle(x, y), 1e-12);
  const std::vector<double> lin{3, 5, 7, 9, 11};
  EXPECT_NEAR(detail::pearson(x, lin), 1.0, 1e-12);
  std::vector<double> anti(x.rbegin(), x.rend());
  EXPECT_NEAR(detail::pearson(x, anti), -1.0, 1e-12);
}

TEST(Pearson, DegenerateInputsGoToNegativeInfinity) {
  EXPECT_EQ(detail::pearson({1.0}, {2.0}), kNegInf);
  EXPECT_EQ(detail::pearson({}, {}), kNegInf);
  EXPECT_EQ(detail::pearson({1, 1, 1}, {1, 2, 3}), kNegInf);
  EXPECT_EQ(detail::pearson({1, 2, 3}, {5, 5, 5}), kNegInf);
  EXPECT_EQ(detail::pearson({1, 2}, {1, 2, 3}), kNegInf);
}

TEST(GroupDays, FullYearByMonthAndIsoWeek) {
  SyntheticScenario s;
  s.location = {34.0, -117.0};
  s.start_date = {2016, 1, 1};
  s.end_date = {2016, 12, 31};
  s.step_minutes = 60;
  s.ground_truth = {180.0, 20.0};
  auto [irr, gen] = synthesize(s);

  const auto monthly = group_days(gen, GroupingScheme::Monthly);
  ASSERT_EQ(monthly.size(), 12u);
  EXPECT_EQ(monthly.front().group_id, "2016-01");
  EXPECT_EQ(monthly.back().group_id, "2016-12");
  EXPECT_EQ(monthly[0].days.size(), 31u);
  EXPECT_EQ(monthly[1].days.size(), 29u);  // leap February

  // 2016-01-01 belongs to ISO week 2015-W53; the year then spans W01..W52.
  const auto weekly = group_days(gen, GroupingScheme::IsoWeekly);
  ASSERT_EQ(weekly.size(), 53u);
  EXPECT_EQ(weekly.front().group_id, "2015-W53");
  EXPECT_EQ(weekly[1].group_id, "2016-W01");
  EXPECT_EQ(weekly.back().group_id, "2016-W52");
  std::set<std::string> ids;
  size_t total = 0;
  for (const auto& g : weekly) {
    ids.insert(g.group_id);
    total += g.days.size();
  }
  EXPECT_EQ(ids.size(), weekly.size());
  EXPECT_EQ(total, 366u);
}

TEST(GroupDays, IncompleteDaysAreDroppedAndReported) {
  PowerProfile p = hourly_profile({2016, 3, 1}, {std::vector<double>(24, 1.0),
                                                 std::vector<double>(24, 1.0)});
  // truncated third day
  for (int h = 0; h < 5; ++h)
    p.samples.push_back({to_unix({2016, 3, 3}) + h * 3600, 1.0});
  std::vector<CivilDate> dropped;
  const auto groups = group_days(p, GroupingScheme::Monthly, &dropped);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].days.size(), 2u);
  ASSERT_EQ(dropped.size(), 1u);
  EXPECT_EQ(dropped[0], (CivilDate{2016, 3, 3}));
}

TEST(GroupDays, EmptyAndUnresolvableProfilesThrow) {
  PowerProfile empty;
  EXPECT_THROW(group_days(empty, GroupingScheme::Monthly), EmptyProfile);
  PowerProfile one;
  one.samples.push_back({0, 1.0});
  one.resolution_per_day = 0;
  EXPECT_THROW(group_days(one, GroupingScheme::Monthly), EmptyProfile);
}

TEST(PrototypicalDay, PicksTheMostCorrelatedDay) {
  const CivilDate start{2016, 6, 6};
  PowerProfile p = hourly_profile(start, {std::vector<double>(24, 1.0),
                                          std::vector<double>(24, 1.0),
                                          std::vector<double>(24, 1.0)});
  const auto irr = irradiance_days(start, 3, /*clear_day=*/1);

  auto groups = group_days(p, GroupingScheme::IsoWeekly);
  ASSERT_EQ(groups.size(), 1u);
  const CivilDate chosen = select_prototypical_day(groups[0], irr);
  EXPECT_EQ(chosen, (CivilDate{2016, 6, 7}));

  // the in-test oracle agrees on every stored daylight correlation
  ASSERT_EQ(groups[0].correlations.size(), 3u);
  for (int d = 0; d < 3; ++d) {
    std::vector<double> dni, ghi;
    for (int h = 6; h <= 18; ++h) {
      const auto& r = irr[static_cast<size_t>(d) * 24 + static_cast<size_t>(h)];
      dni.push_back(r.dni);
      ghi.push_back(r.ghi);
    }
    EXPECT_NEAR(groups[0].correlations[static_cast<size_t>(d)].r, pearson_oracle(dni, ghi), 1e-12);
  }
}

TEST(PrototypicalDay, TieBreaksToTheEarliestDay) {
  const CivilDate start{2016, 6, 6};
  PowerProfile p = hourly_profile(start, {std::vector<double>(24, 1.0),
                                          std::vector<double>(24, 1.0)});
  // both days identical and perfectly correlated
  auto irr = irradiance_days(start, 2, /*clear_day=*/0);
  for (int h = 0; h < 24; ++h) {
    irr[24 + h].dni = irr[h].dni;
    irr[24 + h].ghi = irr[h].ghi;
    irr[24 + h].dhi = irr[h].dhi;
  }
  auto groups = group_days(p, GroupingScheme::IsoWeekly);
  EXPECT_EQ(select_prototypical_day(groups[0], irr), start);
}

TEST(PrototypicalDay, DegenerateCorrelationsFallBackToEarliest) {
  const CivilDate start{2016, 6, 6};
  PowerProfile p = hourly_profile(start, {std::vector<double>(24, 1.0),
                                          std::vector<double>(24, 1.0)});
  auto irr = irradiance_days(start, 2, /*clear_day=*/0);
  for (auto& r : irr) {  // constant series: correlation degenerates everywhere
    if (r.solar_zenith_deg < 90.0) {
      r.dni = 500.0;
      r.ghi = 400.0;
    }
  }
  auto groups = group_days(p, GroupingScheme::IsoWeekly);
  EXPECT_EQ(select_prototypical_day(groups[0], irr), start);
}

TEST(PrototypicalDay, AllNightGroupsThrow) {
  const CivilDate start{2016, 6, 6};
  PowerProfile p = hourly_profile(start, {std::vector<double>(24, 1.0)});
  auto irr = irradiance_days(start, 1, /*clear_day=*/0);
  for (auto& r : irr) r.solar_zenith_deg = 120.0;
  auto groups = group_days(p, GroupingScheme::IsoWeekly);
  EXPECT_THROW(select_prototypical_day(groups[0], irr), NoDaylightSamples);
}

TEST(Preprocess, EndToEndShapesAndReport) {
  SyntheticScenario s;
  s.location = {34.0, -117.0};
  s.start_date = {2016, 7, 1};
  s.end_date = {2016, 7, 31};
  s.step_minutes = 60;
  s.ground_truth = {180.0, 20.0};
  auto [irr, gen] = synthesize(s);

  const PreprocessResult res = preprocess(gen, irr, GroupingScheme::Monthly);
  ASSERT_EQ(res.groups.size(), 1u);
  EXPECT_EQ(res.resolution_per_day, 24);
  EXPECT_TRUE(res.dropped_days.empty());
  const DayGroup& g = res.groups[0];
  ASSERT_TRUE(g.prototypical_day.has_value());
  ASSERT_EQ(g.prototype_profile.size(), 24u);
  EXPECT_FALSE(g.prototype_all_zero);
  const double peak = *std::max_element(g.prototype_profile.begin(), g.prototype_profile.end());
  EXPECT_DOUBLE_EQ(peak, 1.0);

  const nlohmann::json rep = preprocess_report_json(res);
  EXPECT_EQ(rep.at("resolution_per_day").get<int>(), 24);
  ASSERT_EQ(rep.at("groups").size(), 1u);
  EXPECT_EQ(rep.at("groups")[0].at("group_id").get<std::string>(), "2016-07");
  EXPECT_EQ(rep.at("groups")[0].at("day_count").get<size_t>(), 31u);
  EXPECT_EQ(rep.at("groups")[0].at("correlations").size(), 31u);
  EXPECT_TRUE(rep.at("dropped_days").is_array());
}
