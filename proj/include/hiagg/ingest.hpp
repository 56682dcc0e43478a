#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "hiagg/core_model.hpp"

namespace hiagg {

// ---------------------------------------------------------------------------
// Fleet files
// ---------------------------------------------------------------------------

inline constexpr std::string_view kFleetHeader =
    "asset_id,substation_id,bay_id,asset_type,population_class,build_year,"
    "hi_score,replacement_cost_eur,bay_critical";

inline constexpr std::size_t kFleetColumns = 9;

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T> std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end)
    return std::nullopt;
  return value;
}

inline std::string format_shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
  return std::string(buf, ptr);
}

} // namespace detail

/// Parses a fleet table. Rows are grouped into substations and bays in
/// order of first appearance. Hard schema violations throw `Error` with the
/// source name and line number.
inline Fleet parse_fleet(std::istream &in, const std::string &source = "<fleet>") {
  auto fail = [&](ErrorKind kind, std::size_t line, std::string msg) -> void {
    throw Error(kind, std::move(msg), Provenance{source, line, {}});
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    fail(ErrorKind::MissingHeader, 1, "empty file, expected header");
  ++line_no;
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);
  if (line != kFleetHeader)
    fail(ErrorKind::MissingHeader, 1,
         "header must be exactly '" + std::string(kFleetHeader) + "'");

  Fleet fleet;
  std::unordered_map<std::string, std::size_t> sub_index;
  std::vector<std::unordered_map<std::string, std::size_t>> bay_index;
  std::unordered_map<std::string, std::size_t> seen_ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;

    const auto f = detail::split_commas(line);
    if (f.size() != kFleetColumns)
      fail(ErrorKind::MalformedRow, line_no,
           "expected " + std::to_string(kFleetColumns) + " fields, got " +
               std::to_string(f.size()));

    Asset a;
    a.source_line = line_no;
    a.asset_id = std::string(f[0]);
    const std::string sub_id(f[1]);
    const std::string bay_id(f[2]);
    a.asset_type = std::string(f[3]);
    if (a.asset_id.empty() || sub_id.empty() || bay_id.empty())
      fail(ErrorKind::MalformedRow, line_no, "asset_id, substation_id and bay_id are required");
    if (a.asset_type.empty())
      fail(ErrorKind::MalformedRow, line_no, "asset_type is required");

    const auto cls = parse_population_class(f[4]);
    if (!cls)
      fail(ErrorKind::UnknownClass, line_no,
           "population_class '" + std::string(f[4]) + "' is not primary/secondary/tertiary");
    a.population_class = *cls;

    if (!f[5].empty()) {
      const auto year = detail::parse_number<int>(f[5]);
      if (!year)
        fail(ErrorKind::MalformedRow, line_no, "build_year '" + std::string(f[5]) + "' is not an integer");
      if (*year < kMinBuildYear || *year > kMaxBuildYear)
        fail(ErrorKind::MalformedRow, line_no,
             "build_year " + std::to_string(*year) + " outside 1900..2100");
      a.build_year = *year;
    }

    const auto hi = detail::parse_number<int>(f[6]);
    if (!hi)
      fail(ErrorKind::MalformedRow, line_no, "hi_score '" + std::string(f[6]) + "' is not an integer");
    if (*hi < HealthScore::kMin || *hi > HealthScore::kMax)
      fail(ErrorKind::HiOutOfRange, line_no,
           "hi_score " + std::to_string(*hi) + " outside 0..10");
    a.hi = HealthScore(*hi);

    if (!f[7].empty()) {
      const auto cost = detail::parse_number<double>(f[7]);
      if (!cost || !std::isfinite(*cost))
        fail(ErrorKind::MalformedRow, line_no,
             "replacement_cost_eur '" + std::string(f[7]) + "' is not a number");
      if (*cost < 0.0)
        fail(ErrorKind::MalformedRow, line_no, "replacement_cost_eur must be nonnegative");
      a.replacement_cost = *cost;
    }

    if (f[8] == "true")
      a.bay_critical = true;
    else if (f[8] == "false")
      a.bay_critical = false;
    else
      fail(ErrorKind::MalformedRow, line_no,
           "bay_critical '" + std::string(f[8]) + "' must be true or false");

    if (auto [it, fresh] = seen_ids.emplace(a.asset_id, line_no); !fresh)
      fail(ErrorKind::DuplicateAssetId, line_no,
           "asset_id '" + a.asset_id + "' already used on line " + std::to_string(it->second));

    auto [sit, new_sub] = sub_index.emplace(sub_id, fleet.size());
    if (new_sub) {
      fleet.push_back(Substation{sub_id, {}});
      bay_index.emplace_back();
    }
    Substation &sub = fleet[sit->second];
    auto &bays = bay_index[sit->second];
    auto [bit, new_bay] = bays.emplace(bay_id, sub.bays.size());
    if (new_bay)
      sub.bays.push_back(Bay{bay_id, {}});
    sub.bays[bit->second].assets.push_back(std::move(a));
  }
  return fleet;
}

inline Fleet parse_fleet_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Unreadable, "cannot open fleet file", Provenance{path, {}, {}});
  return parse_fleet(in, path);
}

/// Writes a fleet in hierarchy order (substation, bay, asset).
inline void serialize_fleet(const Fleet &fleet, std::ostream &out) {
  out << kFleetHeader << '\n';
  for (const auto &sub : fleet)
    for (const auto &bay : sub.bays)
      for (const auto &a : bay.assets) {
        out << a.asset_id << ',' << sub.substation_id << ',' << bay.bay_id << ','
            << a.asset_type << ',' << to_string(a.population_class) << ',';
        if (a.build_year)
          out << *a.build_year;
        out << ',' << a.hi.value() << ',';
        if (a.replacement_cost)
          out << detail::format_shortest(*a.replacement_cost);
        out << ',' << (a.bay_critical ? "true" : "false") << '\n';
      }
}

inline std::string serialize_fleet(const Fleet &fleet) {
  std::ostringstream os;
  serialize_fleet(fleet, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Catalog documents
// ---------------------------------------------------------------------------
//
// {
//   "severities": { "<type>": 464, "<type>": {"before": 152, "cutoff_year": 1992, "from": 237} },
//   "weights":    { "<type>": {"class": "primary", "weight": 8} }
// }
//
// A missing section falls back to the built-in table.

inline Catalogs catalogs_from_json(const nlohmann::json &doc, const std::string &source) {
  auto where = [&](std::string detail) { return Provenance{source, {}, std::move(detail)}; };
  auto malformed = [&](std::string detail, std::string msg) {
    throw Error(ErrorKind::MalformedCatalog, std::move(msg), where(std::move(detail)));
  };
  auto integer = [&](const nlohmann::json &v, const std::string &path) -> long {
    if (!v.is_number_integer())
      malformed(path, "expected an integer");
    return v.get<long>();
  };

  if (!doc.is_object())
    malformed("", "catalog document must be an object");
  for (const auto &[key, value] : doc.items())
    if (key != "severities" && key != "weights")
      malformed(key, "unknown top-level key");

  Catalogs out;
  if (doc.contains("severities")) {
    const auto &sec = doc["severities"];
    if (!sec.is_object())
      malformed("severities", "expected an object");
    std::map<std::string, SeverityRule, std::less<>> entries;
    for (const auto &[type, rule] : sec.items()) {
      const std::string path = "severities." + type;
      if (rule.is_object()) {
        for (const char *k : {"before", "cutoff_year", "from"})
          if (!rule.contains(k))
            malformed(path, std::string("missing key '") + k + "'");
        entries.emplace(type, YearSplitSeverity{integer(rule["before"], path + ".before"),
                                                static_cast<int>(integer(rule["cutoff_year"], path + ".cutoff_year")),
                                                integer(rule["from"], path + ".from")});
      } else {
        entries.emplace(type, ConstantSeverity{integer(rule, path)});
      }
    }
    out.severities = SeverityCatalog(std::move(entries), where(""));
  }

  if (doc.contains("weights")) {
    const auto &sec = doc["weights"];
    if (!sec.is_object())
      malformed("weights", "expected an object");
    std::map<std::string, WeightEntry, std::less<>> entries;
    for (const auto &[type, entry] : sec.items()) {
      const std::string path = "weights." + type;
      if (!entry.is_object() || !entry.contains("class") || !entry.contains("weight"))
        malformed(path, "expected {\"class\": ..., \"weight\": ...}");
      if (!entry["class"].is_string())
        malformed(path + ".class", "expected a string");
      const auto cls = parse_population_class(entry["class"].get<std::string>());
      if (!cls)
        throw Error(ErrorKind::UnknownClass,
                    "population class '" + entry["class"].get<std::string>() + "' is unknown",
                    where(path + ".class"));
      if (!entry["weight"].is_number())
        malformed(path + ".weight", "expected a number");
      entries.emplace(type, WeightEntry{*cls, entry["weight"].get<double>()});
    }
    out.weights = WeightCatalog(std::move(entries), where(""));
  }
  return out;
}

inline Catalogs parse_catalogs(std::istream &in, const std::string &source = "<catalog>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorKind::MalformedCatalog, e.what(),
                Provenance{source, {}, "byte " + std::to_string(e.byte)});
  }
  return catalogs_from_json(doc, source);
}

/// Loads catalogs from a file, or the built-in tables when `path` is empty.
inline Catalogs parse_catalogs(const std::optional<std::string> &path) {
  if (!path || path->empty())
    return Catalogs{};
  std::ifstream in(*path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Unreadable, "cannot open catalog file", Provenance{*path, {}, {}});
  return parse_catalogs(in, *path);
}

// ---------------------------------------------------------------------------
// Data-quality audit
// ---------------------------------------------------------------------------

struct QualityCounts {
  std::size_t n_assets = 0;
  std::size_t n_invalid = 0;      // HI = 0
  std::size_t unknown_type = 0;   // type absent from both catalogs
  std::size_t missing_fields = 0; // empty build_year or replacement cost
  std::size_t missing_required_year = 0;  // year-split severity type without a year

  /// Invalid fraction; 0 for an empty group.
  double invalid_fraction() const {
    return n_assets == 0 ? 0.0 : static_cast<double>(n_invalid) / static_cast<double>(n_assets);
  }

  QualityCounts &operator+=(const QualityCounts &o) {
    n_assets += o.n_assets;
    n_invalid += o.n_invalid;
    unknown_type += o.unknown_type;
    missing_fields += o.missing_fields;
    missing_required_year += o.missing_required_year;
    return *this;
  }
  friend bool operator==(const QualityCounts &, const QualityCounts &) = default;
};

struct BayAudit {
  std::string bay_id;
  QualityCounts counts;
};

struct SubstationAudit {
  std::string substation_id;
  QualityCounts counts;
  std::vector<BayAudit> bays;  // file order
  // Unweighted mean of per-bay invalid fractions (empty bays count as 0).
  double mean_bay_invalid_fraction = 0.0;
};

struct QualityAudit {
  std::vector<SubstationAudit> substations;
  QualityCounts totals;
};

inline QualityCounts audit_bay(const Bay &bay, const Catalogs &catalogs) {
  QualityCounts c;
  for (const auto &a : bay.assets) {
    ++c.n_assets;
    if (!a.hi.valid())
      ++c.n_invalid;
    if (!catalogs.knows(a.asset_type))
      ++c.unknown_type;
    if (!a.build_year)
      ++c.missing_fields;
    if (!a.replacement_cost)
      ++c.missing_fields;
    if (!a.build_year) {
      const SeverityRule *rule = catalogs.severities.find(a.asset_type);
      if (rule && std::holds_alternative<YearSplitSeverity>(*rule))
        ++c.missing_required_year;
    }
  }
  return c;
}

inline SubstationAudit audit_substation(const Substation &sub, const Catalogs &catalogs = {}) {
  SubstationAudit s;
  s.substation_id = sub.substation_id;
  double fraction_sum = 0.0;
  for (const auto &bay : sub.bays) {
    BayAudit b{bay.bay_id, audit_bay(bay, catalogs)};
    s.counts += b.counts;
    fraction_sum += b.counts.invalid_fraction();
    s.bays.push_back(std::move(b));
  }
  if (!sub.bays.empty())
    s.mean_bay_invalid_fraction = fraction_sum / static_cast<double>(sub.bays.size());
  return s;
}

inline QualityAudit audit_fleet(const Fleet &fleet, const Catalogs &catalogs = {}) {
  QualityAudit audit;
  for (const auto &sub : fleet) {
    audit.substations.push_back(audit_substation(sub, catalogs));
    audit.totals += audit.substations.back().counts;
  }
  return audit;
}

/// True when the fleet-level or any substation-level invalid fraction
/// exceeds `threshold`.
inline bool exceeds_threshold(const QualityAudit &audit, double threshold) {
  if (audit.totals.invalid_fraction() > threshold)
    return true;
  for (const auto &s : audit.substations)
    if (s.counts.invalid_fraction() > threshold)
      return true;
  return false;
}

} // namespace hiagg
