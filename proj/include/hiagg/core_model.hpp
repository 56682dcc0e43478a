#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hiagg/error.hpp"

namespace hiagg {

// ---------------------------------------------------------------------------
// Scores and colour bands
// ---------------------------------------------------------------------------

/// Integer asset health score on 0..10. Zero is "no data" (White band);
/// 1..10 are real conditions with 10 the best.
class HealthScore {
public:
  static constexpr int kMin = 0;
  static constexpr int kMax = 10;

  constexpr HealthScore() = default;
  explicit HealthScore(int value) : value_(checked(value)) {}

  constexpr int value() const noexcept { return value_; }
  constexpr bool valid() const noexcept { return value_ != 0; }

  friend constexpr bool operator==(HealthScore, HealthScore) = default;
  friend constexpr auto operator<=>(HealthScore, HealthScore) = default;

private:
  static int checked(int value) {
    if (value < kMin || value > kMax)
      throw Error(ErrorKind::HiOutOfRange,
                  "hi_score " + std::to_string(value) + " outside 0..10");
    return value;
  }

  int value_ = 0;
};

enum class ColorBand { Green, Orange, Red, Violet, White };

inline constexpr std::array<ColorBand, 5> kAllBands = {
    ColorBand::Green, ColorBand::Orange, ColorBand::Red, ColorBand::Violet,
    ColorBand::White};

constexpr std::string_view to_string(ColorBand band) {
  switch (band) {
  case ColorBand::Green: return "green";
  case ColorBand::Orange: return "orange";
  case ColorBand::Red: return "red";
  case ColorBand::Violet: return "violet";
  case ColorBand::White: return "white";
  }
  return "white";
}

/// Inclusive score range covered by a band.
struct ScoreRange {
  int lo;
  int hi;
};

constexpr ScoreRange range_of(ColorBand band) {
  switch (band) {
  case ColorBand::Green: return {9, 10};
  case ColorBand::Orange: return {7, 8};
  case ColorBand::Red: return {4, 6};
  case ColorBand::Violet: return {1, 3};
  case ColorBand::White: return {0, 0};
  }
  return {0, 0};
}

constexpr ColorBand band_of(HealthScore score) {
  const int v = score.value();
  if (v >= 9)
    return ColorBand::Green;
  if (v >= 7)
    return ColorBand::Orange;
  if (v >= 4)
    return ColorBand::Red;
  if (v >= 1)
    return ColorBand::Violet;
  return ColorBand::White;
}

/// Interpretation of a band when a bay score comes from the
/// failure-interpretation strategy (minimum over bay-critical assets).
constexpr std::string_view failure_meaning(ColorBand band) {
  switch (band) {
  case ColorBand::Green: return "fit for service";
  case ColorBand::Orange: return "monitor";
  case ColorBand::Red: return "plan intervention";
  case ColorBand::Violet: return "imminent bay outage risk";
  case ColorBand::White: return "no data";
  }
  return "no data";
}

/// Round-half-up to the nearest integer, for non-negative scores.
inline int round_half_up(double x) {
  return static_cast<int>(std::floor(x + 0.5));
}

/// Band of a fractional aggregate score: rounded half-up, then clamped to
/// the valid condition range 1..10.
inline ColorBand band_of_aggregate(double score) {
  int r = round_half_up(score);
  if (r < 1)
    r = 1;
  if (r > HealthScore::kMax)
    r = HealthScore::kMax;
  return band_of(HealthScore(r));
}

// ---------------------------------------------------------------------------
// Hierarchy
// ---------------------------------------------------------------------------

enum class PopulationClass { Primary, Secondary, Tertiary };

constexpr std::string_view to_string(PopulationClass c) {
  switch (c) {
  case PopulationClass::Primary: return "primary";
  case PopulationClass::Secondary: return "secondary";
  case PopulationClass::Tertiary: return "tertiary";
  }
  return "primary";
}

inline std::optional<PopulationClass> parse_population_class(std::string_view s) {
  if (s == "primary")
    return PopulationClass::Primary;
  if (s == "secondary")
    return PopulationClass::Secondary;
  if (s == "tertiary")
    return PopulationClass::Tertiary;
  return std::nullopt;
}

/// Allowed weight range for a population class.
struct WeightRange {
  double lo;
  double hi;
  constexpr bool contains(double w) const { return w >= lo && w <= hi; }
};

constexpr WeightRange weight_range(PopulationClass c) {
  switch (c) {
  case PopulationClass::Primary: return {7, 10};
  case PopulationClass::Secondary: return {4, 6};
  case PopulationClass::Tertiary: return {1, 3};
  }
  return {1, 3};
}

/// Canonical asset-type keys known to the built-in catalogs.
namespace asset_types {
inline constexpr std::string_view kCircuitBreaker = "circuit_breaker";
inline constexpr std::string_view kDisconnector = "disconnector";
inline constexpr std::string_view kInstrumentTransformer = "instrument_transformer";
inline constexpr std::string_view kPowerTransformer = "power_transformer";
inline constexpr std::string_view kProtectionDevice = "protection_device";
inline constexpr std::string_view kEarthing = "earthing";
inline constexpr std::string_view kCompensationCoil = "compensation_coil";
inline constexpr std::string_view kSurgeArrestor = "surge_arrestor";
inline constexpr std::string_view kControlDevice = "control_device";

inline constexpr std::array<std::string_view, 9> kAll = {
    kEarthing,         kCompensationCoil,      kProtectionDevice,
    kPowerTransformer, kSurgeArrestor,         kDisconnector,
    kInstrumentTransformer, kControlDevice,    kCircuitBreaker};
} // namespace asset_types

inline constexpr int kMinBuildYear = 1900;
inline constexpr int kMaxBuildYear = 2100;

struct Asset {
  std::string asset_id;
  std::string asset_type;
  PopulationClass population_class = PopulationClass::Primary;
  HealthScore hi;
  std::optional<int> build_year;
  std::optional<double> replacement_cost;  // EUR
  bool bay_critical = false;
  // 1-based line in the fleet file this asset came from; 0 if not parsed.
  std::size_t source_line = 0;

  // Provenance is not part of an asset's identity.
  friend bool operator==(const Asset &a, const Asset &b) {
    return a.asset_id == b.asset_id && a.asset_type == b.asset_type &&
           a.population_class == b.population_class && a.hi == b.hi &&
           a.build_year == b.build_year &&
           a.replacement_cost == b.replacement_cost &&
           a.bay_critical == b.bay_critical;
  }

  std::string describe() const {
    std::string s = "asset '" + asset_id + "'";
    if (source_line != 0)
      s += " (line " + std::to_string(source_line) + ")";
    return s;
  }
};

struct Bay {
  std::string bay_id;
  std::vector<Asset> assets;

  friend bool operator==(const Bay &, const Bay &) = default;
};

struct Substation {
  std::string substation_id;
  std::vector<Bay> bays;

  friend bool operator==(const Substation &, const Substation &) = default;
};

using Fleet = std::vector<Substation>;

inline std::size_t asset_count(const Fleet &fleet) {
  std::size_t n = 0;
  for (const auto &sub : fleet)
    for (const auto &bay : sub.bays)
      n += bay.assets.size();
  return n;
}

// ---------------------------------------------------------------------------
// Catalogs
// ---------------------------------------------------------------------------

struct ConstantSeverity {
  long severity;
  friend bool operator==(const ConstantSeverity &, const ConstantSeverity &) = default;
};

/// `before` applies to build years strictly below `cutoff_year`, `from` to
/// the cutoff year and later.
struct YearSplitSeverity {
  long before;
  int cutoff_year;
  long from;
  friend bool operator==(const YearSplitSeverity &, const YearSplitSeverity &) = default;
};

using SeverityRule = std::variant<ConstantSeverity, YearSplitSeverity>;

/// FMECA severity per asset type. Each entry is the aggregate severity of
/// all failure modes of that type.
class SeverityCatalog {
public:
  SeverityCatalog() = default;
  explicit SeverityCatalog(std::map<std::string, SeverityRule, std::less<>> entries,
                           Provenance where = {})
      : entries_(std::move(entries)) {
    for (const auto &[type, rule] : entries_)
      validate(type, rule, where);
  }

  static SeverityCatalog defaults() {
    using namespace asset_types;
    std::map<std::string, SeverityRule, std::less<>> e;
    e.emplace(kEarthing, ConstantSeverity{343});
    e.emplace(kCompensationCoil, ConstantSeverity{304});
    e.emplace(kProtectionDevice, YearSplitSeverity{152, 1992, 237});
    e.emplace(kPowerTransformer, ConstantSeverity{458});
    e.emplace(kSurgeArrestor, ConstantSeverity{128});
    e.emplace(kDisconnector, ConstantSeverity{313});
    e.emplace(kInstrumentTransformer, ConstantSeverity{377});
    e.emplace(kControlDevice, ConstantSeverity{148});
    e.emplace(kCircuitBreaker, ConstantSeverity{464});
    return SeverityCatalog(std::move(e));
  }

  const SeverityRule *find(std::string_view type) const {
    auto it = entries_.find(type);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool contains(std::string_view type) const { return find(type) != nullptr; }
  const auto &entries() const noexcept { return entries_; }

  friend bool operator==(const SeverityCatalog &, const SeverityCatalog &) = default;

private:
  static void validate(const std::string &type, const SeverityRule &rule,
                       const Provenance &where) {
    auto bad = [&](long s) {
      Provenance p = where;
      p.detail = "severities." + type;
      throw Error(ErrorKind::NegativeSeverity,
                  "severity " + std::to_string(s) + " must be positive", p);
    };
    if (const auto *c = std::get_if<ConstantSeverity>(&rule)) {
      if (c->severity <= 0)
        bad(c->severity);
    } else {
      const auto &y = std::get<YearSplitSeverity>(rule);
      if (y.before <= 0)
        bad(y.before);
      if (y.from <= 0)
        bad(y.from);
    }
  }

  std::map<std::string, SeverityRule, std::less<>> entries_;
};

inline long severity_of(std::string_view asset_type, std::optional<int> build_year,
                        const SeverityCatalog &catalog) {
  const SeverityRule *rule = catalog.find(asset_type);
  if (!rule)
    throw Error(ErrorKind::UnknownAssetType,
                "no severity for asset type '" + std::string(asset_type) + "'");
  if (const auto *c = std::get_if<ConstantSeverity>(rule))
    return c->severity;
  const auto &split = std::get<YearSplitSeverity>(*rule);
  if (!build_year)
    throw Error(ErrorKind::MissingBuildYear,
                "asset type '" + std::string(asset_type) +
                    "' needs a build year to resolve its severity");
  return *build_year < split.cutoff_year ? split.before : split.from;
}

inline long severity_of(const Asset &asset, const SeverityCatalog &catalog) {
  try {
    return severity_of(asset.asset_type, asset.build_year, catalog);
  } catch (const Error &e) {
    throw Error(e.kind(), asset.describe() + ": " + e.message());
  }
}

struct WeightEntry {
  PopulationClass population_class;
  double weight;
  friend bool operator==(const WeightEntry &, const WeightEntry &) = default;
};

/// Expert weight per asset type; each weight must lie inside its
/// population class's range (primary 7-10, secondary 4-6, tertiary 1-3).
class WeightCatalog {
public:
  WeightCatalog() = default;
  explicit WeightCatalog(std::map<std::string, WeightEntry, std::less<>> entries,
                         Provenance where = {})
      : entries_(std::move(entries)) {
    for (const auto &[type, entry] : entries_) {
      if (!weight_range(entry.population_class).contains(entry.weight)) {
        Provenance p = where;
        p.detail = "weights." + type;
        const auto r = weight_range(entry.population_class);
        throw Error(ErrorKind::WeightOutOfClassRange,
                    "weight " + std::to_string(entry.weight) + " outside " +
                        std::string(to_string(entry.population_class)) +
                        " range " + std::to_string(static_cast<int>(r.lo)) +
                        "-" + std::to_string(static_cast<int>(r.hi)),
                    p);
      }
    }
  }

  /// Class midpoint of the built-in class assignment.
  static double default_weight(PopulationClass c) {
    // Midpoint rounded down: 8.5 -> 8 for Primary.
    const auto r = weight_range(c);
    return std::floor((r.lo + r.hi) / 2.0);
  }

  static PopulationClass default_class(std::string_view type) {
    using namespace asset_types;
    if (type == kProtectionDevice || type == kControlDevice || type == kSurgeArrestor)
      return PopulationClass::Secondary;
    if (type == kEarthing)
      return PopulationClass::Tertiary;
    return PopulationClass::Primary;
  }

  static WeightCatalog defaults() {
    std::map<std::string, WeightEntry, std::less<>> e;
    for (auto type : asset_types::kAll) {
      const auto c = default_class(type);
      e.emplace(std::string(type), WeightEntry{c, default_weight(c)});
    }
    return WeightCatalog(std::move(e));
  }

  const WeightEntry *find(std::string_view type) const {
    auto it = entries_.find(type);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool contains(std::string_view type) const { return find(type) != nullptr; }
  const auto &entries() const noexcept { return entries_; }

  double weight_of(const Asset &asset) const {
    const WeightEntry *e = find(asset.asset_type);
    if (!e)
      throw Error(ErrorKind::UnknownAssetType,
                  asset.describe() + ": no weight for asset type '" +
                      asset.asset_type + "'");
    return e->weight;
  }

  friend bool operator==(const WeightCatalog &, const WeightCatalog &) = default;

private:
  std::map<std::string, WeightEntry, std::less<>> entries_;
};

struct Catalogs {
  SeverityCatalog severities = SeverityCatalog::defaults();
  WeightCatalog weights = WeightCatalog::defaults();

  bool knows(std::string_view type) const {
    return severities.contains(type) || weights.contains(type);
  }
};

// ---------------------------------------------------------------------------
// Strategy configuration
// ---------------------------------------------------------------------------

enum class Method { WeightedAverage, Fmeca, ReplacementCost, FailureInterpretation };
enum class Normalization { Raw, Normalized };

constexpr std::string_view to_string(Normalization n) {
  return n == Normalization::Raw ? "raw" : "normalized";
}

struct StrategyConfig {
  Method method = Method::Fmeca;
  Normalization normalization = Normalization::Normalized;
  unsigned worst_case_cap_offset = 3;
  double power_mean_exponent = -2.0;
  double invalid_fraction_threshold = 0.25;

  void validate() const {
    if (power_mean_exponent == 0.0 || !std::isfinite(power_mean_exponent))
      throw Error(ErrorKind::InvalidConfig, "power-mean exponent must be a nonzero finite number");
    if (!(invalid_fraction_threshold >= 0.0 && invalid_fraction_threshold <= 1.0))
      throw Error(ErrorKind::InvalidConfig, "invalid-fraction threshold must lie in [0, 1]");
  }
};

} // namespace hiagg
