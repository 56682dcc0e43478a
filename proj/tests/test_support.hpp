#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// deliberately avoid the library's aggregation code paths: exact rationals
// for weighted means, long-double direct evaluation for power means.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hiagg/core_model.hpp"

namespace hiagg::testing {

inline Asset make_asset(std::string id, std::string_view type, int hi,
                        std::optional<int> year = std::nullopt,
                        std::optional<double> cost = std::nullopt, bool critical = false) {
  Asset a;
  a.asset_id = std::move(id);
  a.asset_type = std::string(type);
  a.population_class = WeightCatalog::default_class(type);
  a.hi = HealthScore(hi);
  a.build_year = year;
  a.replacement_cost = cost;
  a.bay_critical = critical;
  return a;
}

struct BayGenOptions {
  std::size_t min_assets = 1;
  std::size_t max_assets = 12;
  bool allow_invalid = false;
};

/// A random bay whose every asset is fully specified (year, cost), so every
/// strategy can score it.
inline Bay random_bay(std::mt19937_64 &rng, const BayGenOptions &opt = {},
                      const std::string &bay_id = "B") {
  std::uniform_int_distribution<std::size_t> size(opt.min_assets, opt.max_assets);
  std::uniform_int_distribution<std::size_t> type(0, asset_types::kAll.size() - 1);
  std::uniform_int_distribution<int> hi(opt.allow_invalid ? 0 : 1, 10);
  std::uniform_int_distribution<int> year(1960, 2020);
  std::uniform_real_distribution<double> cost(1e3, 5e6);
  std::bernoulli_distribution critical(0.3);

  Bay bay{bay_id, {}};
  const std::size_t n = size(rng);
  for (std::size_t i = 0; i < n; ++i)
    bay.assets.push_back(make_asset(bay_id + "-" + std::to_string(i), asset_types::kAll[type(rng)],
                                    hi(rng), year(rng), std::round(cost(rng)), critical(rng)));
  // Guarantee at least one valid asset.
  if (std::none_of(bay.assets.begin(), bay.assets.end(),
                   [](const Asset &a) { return a.hi.valid(); }))
    bay.assets.front().hi = HealthScore(5);
  return bay;
}

/// Ten bays of identical circuit breakers at HI = 8, bay k holding k
/// assets: equal per-asset health, different sizes.
inline Substation size_ladder_substation(int n_bays = 10, int hi = 8) {
  Substation sub{"ZY", {}};
  for (int k = 1; k <= n_bays; ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "BAY%02d", k);
    Bay bay{id, {}};
    for (int i = 0; i < k; ++i)
      bay.assets.push_back(make_asset(std::string(id) + "-" + std::to_string(i),
                                      "circuit_breaker", hi, 2000, 3.5e5, true));
    sub.bays.push_back(std::move(bay));
  }
  return sub;
}

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

inline long table_severity(const Asset &a) {
  // Written out independently of SeverityCatalog::defaults().
  const std::string &t = a.asset_type;
  if (t == "earthing") return 343;
  if (t == "compensation_coil") return 304;
  if (t == "protection_device") return *a.build_year < 1992 ? 152 : 237;
  if (t == "power_transformer") return 458;
  if (t == "surge_arrestor") return 128;
  if (t == "disconnector") return 313;
  if (t == "instrument_transformer") return 377;
  if (t == "control_device") return 148;
  if (t == "circuit_breaker") return 464;
  return -1;
}

/// Sum over valid assets of HI_i * S_i / sum S_i, as an exact rational.
template <typename SeverityFn>
Rational fmeca_exact(const Bay &bay, SeverityFn severity) {
  Rational num = 0, den = 0;
  for (const auto &a : bay.assets) {
    if (a.hi.value() == 0)
      continue;
    const Rational s = severity(a);
    num += Rational(a.hi.value()) * s;
    den += s;
  }
  return num / den;
}

inline Rational fmeca_exact(const Bay &bay) {
  return fmeca_exact(bay, [](const Asset &a) { return Rational(table_severity(a)); });
}

/// Weighted mean with integer weights, exact.
template <typename WeightFn> Rational weighted_mean_exact(const Bay &bay, WeightFn weight) {
  Rational num = 0, den = 0;
  for (const auto &a : bay.assets) {
    if (a.hi.value() == 0)
      continue;
    const Rational w = weight(a);
    num += Rational(a.hi.value()) * w;
    den += w;
  }
  return num / den;
}

template <typename WeightFn> Rational weighted_sum_exact(const Bay &bay, WeightFn weight) {
  Rational sum = 0;
  for (const auto &a : bay.assets)
    if (a.hi.value() != 0)
      sum += Rational(a.hi.value()) * Rational(weight(a));
  return sum;
}

inline double to_double(const Rational &r) { return r.convert_to<double>(); }

inline int worst_valid(const Bay &bay) {
  int w = 11;
  for (const auto &a : bay.assets)
    if (a.hi.value() != 0)
      w = std::min(w, a.hi.value());
  return w;
}

/// Direct long-double weighted power mean over valid assets with
/// w = log10(1 + cost).
inline double power_mean_direct(const Bay &bay, double p) {
  long double num = 0, den = 0;
  for (const auto &a : bay.assets) {
    if (a.hi.value() == 0)
      continue;
    const long double w = std::log10(1.0L + static_cast<long double>(*a.replacement_cost));
    num += w * std::pow(static_cast<long double>(a.hi.value()), static_cast<long double>(p));
    den += w;
  }
  return static_cast<double>(std::pow(num / den, 1.0L / static_cast<long double>(p)));
}

inline double min_critical(const Bay &bay) {
  int all = 11, crit = 11;
  for (const auto &a : bay.assets) {
    if (a.hi.value() == 0)
      continue;
    all = std::min(all, a.hi.value());
    if (a.bay_critical)
      crit = std::min(crit, a.hi.value());
  }
  return crit <= 10 ? crit : all;
}

} // namespace oracle
} // namespace hiagg::testing
