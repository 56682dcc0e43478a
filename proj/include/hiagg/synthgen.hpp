#pragma once

// Deterministic synthetic fleets.
//
// Random source: std::mt19937_64 seeded with `seed` (the standard fixes the
// algorithm, so streams match across platforms and languages). Every draw is
// derived from the raw 64-bit outputs, never from std distributions:
//   uniform01()      = (x >> 11) * 2^-53
//   uniform_int(a,b) = a + floor(uniform01() * (b - a + 1)), capped at b
//   categorical(w)   = first i with uniform01() * sum(w) < w_0 + ... + w_i
// Draw order per asset: type, band, score within band, build year, cost
// factor. The invalid (HI = 0) subset is chosen afterwards by a partial
// Fisher-Yates shuffle over asset indices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiagg/core_model.hpp"

namespace hiagg {

struct FleetSpec {
  std::uint64_t seed = 1;
  std::size_t n_substations = 5;
  std::size_t bay_count_min = 4;
  std::size_t bay_count_max = 12;
  std::size_t bay_size_min = 1;
  std::size_t bay_size_max = 12;
  // Bay sizes are min + floor(u^skew * (max - min + 1)); skew > 1 favours
  // small bays.
  double bay_size_skew = 1.0;
  // Weights over Green, Orange, Red, Violet.
  std::array<double, 4> hi_weights = {0.4, 0.3, 0.2, 0.1};
  double invalid_fraction = 0.0;
  // Relative frequency per asset type; empty means uniform over the
  // built-in types.
  std::map<std::string, double> type_mix;
  // When set, the fleet has exactly this many assets: bays are dealt
  // round-robin to substations, the last bay truncated, and the bay count
  // range is ignored.
  std::optional<std::size_t> target_assets;
};

namespace detail {

class SynthRng {
public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t uniform_int(std::size_t lo, std::size_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    const auto k = static_cast<std::size_t>(std::floor(uniform01() * span));
    return std::min(lo + k, hi);
  }

  template <typename Range> std::size_t categorical(const Range &weights) {
    double total = 0.0;
    for (double w : weights)
      total += w;
    const double target = uniform01() * total;
    double acc = 0.0;
    std::size_t i = 0, last_positive = 0;
    for (double w : weights) {
      if (w > 0.0)
        last_positive = i;
      acc += w;
      if (target < acc && w > 0.0)
        return i;
      ++i;
    }
    return last_positive;
  }

private:
  std::mt19937_64 engine_;
};

inline void check_spec(const FleetSpec &spec) {
  auto infeasible = [](const std::string &msg) {
    throw Error(ErrorKind::InfeasibleSpec, msg);
  };
  if (spec.n_substations == 0)
    infeasible("n_substations must be at least 1");
  if (!spec.target_assets && (spec.bay_count_min == 0 || spec.bay_count_min > spec.bay_count_max))
    infeasible("bay count range is empty");
  if (spec.bay_size_min == 0 || spec.bay_size_min > spec.bay_size_max)
    infeasible("bay size range is empty (sizes start at 1)");
  if (!(spec.bay_size_skew > 0.0) || !std::isfinite(spec.bay_size_skew))
    infeasible("bay size skew must be positive");
  double hi_total = 0.0;
  for (double w : spec.hi_weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      infeasible("hi_weights must be nonnegative");
    hi_total += w;
  }
  if (!(hi_total > 0.0))
    infeasible("hi_weights must not all be zero");
  if (!(spec.invalid_fraction >= 0.0 && spec.invalid_fraction <= 1.0))
    infeasible("invalid_fraction must lie in [0, 1]");
  double mix_total = 0.0;
  for (const auto &[type, w] : spec.type_mix) {
    if (!(w >= 0.0) || !std::isfinite(w))
      infeasible("type_mix weight for '" + type + "' must be nonnegative");
    mix_total += w;
  }
  if (!spec.type_mix.empty() && !(mix_total > 0.0))
    infeasible("type_mix must have a positive weight");
}

struct CostBase {
  std::string_view type;
  double eur;
};

inline double base_cost(std::string_view type) {
  using namespace asset_types;
  static constexpr std::array<CostBase, 9> table = {{
      {kPowerTransformer, 2'500'000},
      {kCircuitBreaker, 350'000},
      {kCompensationCoil, 900'000},
      {kInstrumentTransformer, 60'000},
      {kDisconnector, 45'000},
      {kSurgeArrestor, 15'000},
      {kProtectionDevice, 40'000},
      {kControlDevice, 25'000},
      {kEarthing, 10'000},
  }};
  for (const auto &c : table)
    if (c.type == type)
      return c.eur;
  return 50'000;
}

inline bool critical_type(std::string_view type) {
  using namespace asset_types;
  return type == kCircuitBreaker || type == kPowerTransformer || type == kProtectionDevice;
}

inline std::string numbered(const char *prefix, std::size_t n, int width) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

/// Exact count for a fraction of n: round-half-up of fraction * n.
inline std::size_t count_for_fraction(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

/// Visits all assets of a fleet in hierarchy order.
template <typename Fn> void for_each_asset(Fleet &fleet, Fn &&fn) {
  for (auto &sub : fleet)
    for (auto &bay : sub.bays)
      for (auto &a : bay.assets)
        fn(a);
}

/// Sets HI = 0 on exactly `k` distinct assets chosen by partial Fisher-Yates.
inline void blank_assets(Fleet &fleet, std::size_t k, SynthRng &rng) {
  std::vector<Asset *> all;
  for_each_asset(fleet, [&](Asset &a) { all.push_back(&a); });
  k = std::min(k, all.size());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = rng.uniform_int(i, all.size() - 1);
    std::swap(all[i], all[j]);
    all[i]->hi = HealthScore(0);
  }
}

} // namespace detail

inline Fleet generate_fleet(const FleetSpec &spec) {
  detail::check_spec(spec);
  detail::SynthRng rng(spec.seed);

  std::vector<std::string> types;
  std::vector<double> mix;
  if (spec.type_mix.empty()) {
    for (auto t : asset_types::kAll) {
      types.emplace_back(t);
      mix.push_back(1.0);
    }
  } else {
    for (const auto &[t, w] : spec.type_mix) {
      types.push_back(t);
      mix.push_back(w);
    }
  }

  Fleet fleet;
  for (std::size_t s = 0; s < spec.n_substations; ++s)
    fleet.push_back(Substation{detail::numbered("S", s + 1, 2), {}});

  std::size_t asset_serial = 0;
  auto make_asset = [&]() {
    Asset a;
    a.asset_id = detail::numbered("A", ++asset_serial, 6);
    a.asset_type = types[rng.categorical(mix)];
    a.population_class = WeightCatalog::default_class(a.asset_type);
    const auto band = kAllBands[rng.categorical(spec.hi_weights)];
    const auto r = range_of(band);
    a.hi = HealthScore(static_cast<int>(
        rng.uniform_int(static_cast<std::size_t>(r.lo), static_cast<std::size_t>(r.hi))));
    a.build_year = static_cast<int>(rng.uniform_int(1960, 2020));
    const double factor = 0.5 + rng.uniform01();
    a.replacement_cost = std::round(detail::base_cost(a.asset_type) * factor);
    a.bay_critical = detail::critical_type(a.asset_type);
    return a;
  };
  auto draw_bay_size = [&]() {
    const double u = std::pow(rng.uniform01(), spec.bay_size_skew);
    const auto span = static_cast<double>(spec.bay_size_max - spec.bay_size_min + 1);
    return std::min(spec.bay_size_min + static_cast<std::size_t>(std::floor(u * span)),
                    spec.bay_size_max);
  };
  auto add_bay = [&](Substation &sub, std::size_t size) {
    Bay bay{sub.substation_id + "-B" + detail::numbered("", sub.bays.size() + 1, 3), {}};
    for (std::size_t i = 0; i < size; ++i)
      bay.assets.push_back(make_asset());
    sub.bays.push_back(std::move(bay));
  };

  if (spec.target_assets) {
    std::size_t remaining = *spec.target_assets;
    for (std::size_t b = 0; remaining > 0; ++b) {
      const std::size_t size = std::min(draw_bay_size(), remaining);
      add_bay(fleet[b % fleet.size()], size);
      remaining -= size;
    }
  } else {
    for (auto &sub : fleet) {
      const std::size_t n_bays = rng.uniform_int(spec.bay_count_min, spec.bay_count_max);
      for (std::size_t b = 0; b < n_bays; ++b)
        add_bay(sub, draw_bay_size());
    }
  }

  const std::size_t n = asset_count(fleet);
  detail::blank_assets(fleet, detail::count_for_fraction(spec.invalid_fraction, n), rng);
  return fleet;
}

/// Sets HI = 0 on round-half-up(fraction * n) uniformly chosen assets.
inline Fleet corrupt_fleet(Fleet fleet, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "corruption fraction must lie in [0, 1]");
  detail::SynthRng rng(seed);
  detail::blank_assets(fleet, detail::count_for_fraction(fraction, asset_count(fleet)), rng);
  return fleet;
}

// ---------------------------------------------------------------------------
// Spec documents (JSON); every key optional, defaults as in FleetSpec.
// ---------------------------------------------------------------------------

inline FleetSpec fleet_spec_from_json(const nlohmann::json &doc, const std::string &source) {
  FleetSpec spec;
  auto bad = [&](const std::string &key, const std::string &msg) {
    throw Error(ErrorKind::InfeasibleSpec, msg, Provenance{source, {}, key});
  };
  if (!doc.is_object())
    bad("", "spec document must be an object");
  try {
    for (const auto &[key, v] : doc.items()) {
      if (key == "seed") spec.seed = v.get<std::uint64_t>();
      else if (key == "n_substations") spec.n_substations = v.get<std::size_t>();
      else if (key == "bay_count_range") {
        spec.bay_count_min = v.at(0).get<std::size_t>();
        spec.bay_count_max = v.at(1).get<std::size_t>();
      } else if (key == "bay_size_range") {
        spec.bay_size_min = v.at(0).get<std::size_t>();
        spec.bay_size_max = v.at(1).get<std::size_t>();
      } else if (key == "bay_size_skew") spec.bay_size_skew = v.get<double>();
      else if (key == "hi_weights") {
        for (std::size_t i = 0; i < 4; ++i)
          spec.hi_weights[i] = v.at(std::string(to_string(kAllBands[i]))).get<double>();
      } else if (key == "invalid_fraction") spec.invalid_fraction = v.get<double>();
      else if (key == "type_mix") spec.type_mix = v.get<std::map<std::string, double>>();
      else if (key == "target_assets") spec.target_assets = v.get<std::size_t>();
      else bad(key, "unknown key");
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::InfeasibleSpec, e.what(), Provenance{source, {}, {}});
  }
  return spec;
}

} // namespace hiagg
