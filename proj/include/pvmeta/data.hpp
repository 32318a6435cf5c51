#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pvmeta/calendar.hpp"
#include "pvmeta/errors.hpp"
#include "pvmeta/io_util.hpp"
#include "pvmeta/solar_position.hpp"

namespace pvmeta {

struct IrradianceRecord {
  UnixTime timestamp = 0;
  double ghi = 0;               // global horizontal, W/m^2
  double dni = 0;               // direct normal, W/m^2
  double dhi = 0;               // diffuse horizontal, W/m^2
  double solar_zenith_deg = 0;  // apparent sun position at the site
  double solar_azimuth_deg = 0;
  double air_temp_c = 0;
};

struct PowerSample {
  UnixTime timestamp = 0;
  double power_w = 0;
};

struct PowerProfile {
  std::string site_id;
  Location location;                  // informational; inference reads sun angles from the weather file
  std::vector<PowerSample> samples;   // strictly increasing timestamps
  int resolution_per_day = 0;         // N, from the modal sampling interval; 0 if undeterminable
};

// Recovered (or known) mounting description for one site.
struct Metadata {
  double azimuth_deg = 0;  // 0 = north, clockwise
  double tilt_deg = 0;     // 0 = horizontal
  std::optional<double> nameplate_w;
};

namespace detail {

// Accept a few common aliases so externally sourced weather files load as-is.
inline std::string canonical_column(std::string name) {
  for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  // strip surrounding whitespace / BOM remnants
  while (!name.empty() && (name.front() == ' ' || name.front() == '\t')) name.erase(name.begin());
  while (!name.empty() && (name.back() == ' ' || name.back() == '\t' || name.back() == '\r')) name.pop_back();
  if (name == "time" || name == "datetime" || name == "date_time") return "timestamp";
  if (name == "solar zenith angle" || name == "zenith" || name == "solar_zenith") return "solar_zenith_deg";
  if (name == "solar azimuth angle" || name == "azimuth" || name == "solar_azimuth") return "solar_azimuth_deg";
  if (name == "temperature" || name == "air_temperature" || name == "temp_air") return "air_temp_c";
  if (name == "power" || name == "ac_power" || name == "power_ac") return "power_w";
  return name;
}

inline std::map<std::string, size_t> header_index(const std::vector<std::string>& cols) {
  std::map<std::string, size_t> idx;
  for (size_t i = 0; i < cols.size(); ++i) idx.emplace(canonical_column(cols[i]), i);
  return idx;
}

inline size_t require_column(const std::map<std::string, size_t>& idx, const std::string& name) {
  auto it = idx.find(name);
  if (it == idx.end()) throw MissingColumn(name);
  return it->second;
}

inline double field_double(const std::vector<std::string>& f, size_t col, long line, const char* what) {
  if (col >= f.size()) throw MalformedRow(line, std::string("missing field: ") + what);
  auto v = parse_double(f[col]);
  if (!v) throw MalformedRow(line, std::string("bad numeric value for ") + what + ": '" + f[col] + "'");
  return *v;
}

inline UnixTime field_timestamp(const std::vector<std::string>& f, size_t col, long line) {
  if (col >= f.size()) throw MalformedRow(line, "missing timestamp field");
  auto t = parse_timestamp(f[col]);
  if (!t) throw MalformedRow(line, "bad timestamp: '" + f[col] + "'");
  return *t;
}

}  // namespace detail

// --- irradiance CSV ---------------------------------------------------------
// Header: timestamp,ghi,dni,dhi,solar_zenith_deg,solar_azimuth_deg,air_temp_c
// Lines starting with '#' are metadata comments and are skipped.

inline std::vector<IrradianceRecord> parse_irradiance_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  // header (skip leading comment lines)
  std::vector<std::string> cols;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    cols = split_csv_line(line);
    break;
  }
  if (cols.empty()) throw MalformedRow(lineno, "empty file: no header row");
  auto idx = detail::header_index(cols);
  size_t c_ts = detail::require_column(idx, "timestamp");
  size_t c_ghi = detail::require_column(idx, "ghi");
  size_t c_dni = detail::require_column(idx, "dni");
  size_t c_dhi = detail::require_column(idx, "dhi");
  size_t c_zen = detail::require_column(idx, "solar_zenith_deg");
  size_t c_azi = detail::require_column(idx, "solar_azimuth_deg");
  size_t c_tmp = detail::require_column(idx, "air_temp_c");

  std::vector<IrradianceRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto f = split_csv_line(line);
    IrradianceRecord r;
    r.timestamp = detail::field_timestamp(f, c_ts, lineno);
    r.ghi = detail::field_double(f, c_ghi, lineno, "ghi");
    r.dni = detail::field_double(f, c_dni, lineno, "dni");
    r.dhi = detail::field_double(f, c_dhi, lineno, "dhi");
    r.solar_zenith_deg = detail::field_double(f, c_zen, lineno, "solar_zenith_deg");
    r.solar_azimuth_deg = detail::field_double(f, c_azi, lineno, "solar_azimuth_deg");
    r.air_temp_c = detail::field_double(f, c_tmp, lineno, "air_temp_c");
    if (r.ghi < 0 || r.dni < 0 || r.dhi < 0)
      throw MalformedRow(lineno, "negative irradiance component");
    if (r.solar_zenith_deg < 0 || r.solar_zenith_deg >= 180 || r.solar_azimuth_deg < 0 ||
        r.solar_azimuth_deg >= 360)
      throw MalformedRow(lineno, "solar angle out of range");
    if (!out.empty() && r.timestamp <= out.back().timestamp)
      throw NonMonotonicTimestamps("timestamps not strictly increasing at line " +
                                   std::to_string(lineno));
    out.push_back(r);
  }
  return out;
}

inline std::vector<IrradianceRecord> load_irradiance_csv(const std::string& path) {
  return parse_irradiance_csv(read_file(path));
}

inline std::string irradiance_csv_text(const std::vector<IrradianceRecord>& recs,
                                       const std::string& meta_comment = "") {
  std::ostringstream out;
  if (!meta_comment.empty()) out << "# " << meta_comment << "\n";
  out << "timestamp,ghi,dni,dhi,solar_zenith_deg,solar_azimuth_deg,air_temp_c\n";
  for (const auto& r : recs) {
    out << format_timestamp(r.timestamp) << ',' << fmt_double(r.ghi) << ',' << fmt_double(r.dni)
        << ',' << fmt_double(r.dhi) << ',' << fmt_double(r.solar_zenith_deg) << ','
        << fmt_double(r.solar_azimuth_deg) << ',' << fmt_double(r.air_temp_c) << '\n';
  }
  return out.str();
}

// --- generation CSV ----------------------------------------------------------
// Header: timestamp,power_w

namespace detail {

// Samples per day implied by the most common consecutive interval.
inline int infer_resolution(const std::vector<PowerSample>& samples) {
  if (samples.size() < 2) return 0;
  std::map<UnixTime, size_t> counts;
  for (size_t i = 1; i < samples.size(); ++i)
    ++counts[samples[i].timestamp - samples[i - 1].timestamp];
  UnixTime mode = 0;
  size_t best = 0;
  for (const auto& [dt, n] : counts)
    if (n > best) { best = n; mode = dt; }
  if (mode <= 0 || 86400 % mode != 0) return 0;
  return static_cast<int>(86400 / mode);
}

}  // namespace detail

inline PowerProfile parse_generation_csv(const std::string& text, const std::string& site_id = "") {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  std::vector<std::string> cols;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    cols = split_csv_line(line);
    break;
  }
  if (cols.empty()) throw MalformedRow(lineno, "empty file: no header row");
  auto idx = detail::header_index(cols);
  size_t c_ts = detail::require_column(idx, "timestamp");
  size_t c_pw = detail::require_column(idx, "power_w");

  PowerProfile p;
  p.site_id = site_id;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto f = split_csv_line(line);
    PowerSample s;
    s.timestamp = detail::field_timestamp(f, c_ts, lineno);
    s.power_w = detail::field_double(f, c_pw, lineno, "power_w");
    if (s.power_w < 0) throw MalformedRow(lineno, "negative power_w");
    if (!p.samples.empty() && s.timestamp <= p.samples.back().timestamp)
      throw NonMonotonicTimestamps("timestamps not strictly increasing at line " +
                                   std::to_string(lineno));
    p.samples.push_back(s);
  }
  p.resolution_per_day = detail::infer_resolution(p.samples);
  return p;
}

inline PowerProfile load_generation_csv(const std::string& path, const std::string& site_id = "",
                                        const Location& location = {}) {
  PowerProfile p = parse_generation_csv(read_file(path), site_id);
  p.location = location;
  return p;
}

inline std::string generation_csv_text(const PowerProfile& p, const std::string& meta_comment = "") {
  std::ostringstream out;
  if (!meta_comment.empty()) out << "# " << meta_comment << "\n";
  out << "timestamp,power_w\n";
  for (const auto& s : p.samples)
    out << format_timestamp(s.timestamp) << ',' << fmt_double(s.power_w) << '\n';
  return out.str();
}

// --- day indexing ------------------------------------------------------------

// Contiguous [begin,end) sample ranges sharing a UTC civil date, in time order.
struct DaySlice {
  CivilDate date;
  size_t begin = 0;
  size_t end = 0;
};

template <class Rec>
inline std::vector<DaySlice> index_days(const std::vector<Rec>& recs) {
  std::vector<DaySlice> out;
  for (size_t i = 0; i < recs.size(); ++i) {
    CivilDate d = date_of(recs[i].timestamp);
    if (out.empty() || !(out.back().date == d)) out.push_back({d, i, i + 1});
    else out.back().end = i + 1;
  }
  return out;
}

}  // namespace pvmeta
