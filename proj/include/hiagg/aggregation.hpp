#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hiagg/core_model.hpp"

namespace hiagg {

/// A method together with the normalization it runs under. Normalization
/// only matters for WeightedAverage.
struct MethodSpec {
  Method method = Method::Fmeca;
  Normalization normalization = Normalization::Normalized;

  friend bool operator==(const MethodSpec &, const MethodSpec &) = default;
};

inline std::string label(const MethodSpec &m) {
  switch (m.method) {
  case Method::WeightedAverage:
    return m.normalization == Normalization::Raw ? "weighted_avg_raw"
                                                 : "weighted_avg_normalized";
  case Method::Fmeca: return "fmeca";
  case Method::ReplacementCost: return "replacement_cost";
  case Method::FailureInterpretation: return "failure_interpretation";
  }
  return "fmeca";
}

/// Parses a method token. Plain `weighted_avg` takes the given default
/// normalization; `weighted_avg_raw` / `weighted_avg_normalized` pin it.
inline std::optional<MethodSpec> parse_method(std::string_view token,
                                              Normalization default_norm) {
  if (token == "weighted_avg" || token == "weighted_average")
    return MethodSpec{Method::WeightedAverage, default_norm};
  if (token == "weighted_avg_raw")
    return MethodSpec{Method::WeightedAverage, Normalization::Raw};
  if (token == "weighted_avg_normalized")
    return MethodSpec{Method::WeightedAverage, Normalization::Normalized};
  if (token == "fmeca")
    return MethodSpec{Method::Fmeca, Normalization::Normalized};
  if (token == "replacement_cost")
    return MethodSpec{Method::ReplacementCost, Normalization::Normalized};
  if (token == "failure_interpretation")
    return MethodSpec{Method::FailureInterpretation, Normalization::Normalized};
  return std::nullopt;
}

inline MethodSpec method_spec(const StrategyConfig &cfg) {
  MethodSpec m{cfg.method, Normalization::Normalized};
  if (cfg.method == Method::WeightedAverage)
    m.normalization = cfg.normalization;
  return m;
}

enum class Indeterminacy { None, NoValidAssets, InvalidFractionExceeded };

constexpr std::string_view to_string(Indeterminacy r) {
  switch (r) {
  case Indeterminacy::None: return "none";
  case Indeterminacy::NoValidAssets: return "no_valid_assets";
  case Indeterminacy::InvalidFractionExceeded: return "invalid_fraction_exceeded";
  }
  return "none";
}

struct BayScore {
  std::string bay_id;
  MethodSpec method;
  std::optional<double> score;  // absent iff indeterminate
  std::optional<ColorBand> band;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  bool capped = false;
  bool raw = false;  // unnormalized weighted sum; may exceed 10
  Indeterminacy indeterminacy = Indeterminacy::None;

  // Roll-up mass of the bay when used as a pseudo-asset one level up:
  // sum of weights, severities or cost weights of its valid assets.
  double mass = 0.0;
  // Whether any valid asset is bay-critical (failure interpretation).
  bool any_critical = false;

  bool indeterminate() const noexcept { return indeterminacy != Indeterminacy::None; }
};

namespace detail {

inline std::vector<const Asset *> valid_assets(const Bay &bay) {
  std::vector<const Asset *> out;
  out.reserve(bay.assets.size());
  for (const auto &a : bay.assets)
    if (a.hi.valid())
      out.push_back(&a);
  return out;
}

inline BayScore start(const Bay &bay, MethodSpec method,
                      const std::vector<const Asset *> &valid) {
  BayScore s;
  s.bay_id = bay.bay_id;
  s.method = method;
  s.n_valid = valid.size();
  s.n_invalid = bay.assets.size() - valid.size();
  if (valid.empty())
    s.indeterminacy = Indeterminacy::NoValidAssets;
  return s;
}

inline void finish(BayScore &s, double score) {
  s.score = score;
  s.band = band_of_aggregate(score);
}

inline double clamp_score(double x) { return std::clamp(x, 1.0, 10.0); }

/// A value and its weight, the common input of every weighted strategy.
struct Weighted {
  double value;
  double weight;
};

inline double weighted_mean(std::span<const Weighted> items) {
  double num = 0.0, den = 0.0;
  for (const auto &w : items) {
    num += w.value * w.weight;
    den += w.weight;
  }
  return num / den;
}

/// Weighted power mean (sum w x^p / sum w)^(1/p). Equal inputs return
/// that input exactly; otherwise the result is clamped into [min, max].
inline double weighted_power_mean(std::span<const Weighted> items, double p) {
  auto [lo, hi] = std::minmax_element(
      items.begin(), items.end(),
      [](const Weighted &a, const Weighted &b) { return a.value < b.value; });
  if (lo->value == hi->value)
    return lo->value;
  double num = 0.0, den = 0.0;
  for (const auto &w : items) {
    num += w.weight * std::pow(w.value, p);
    den += w.weight;
  }
  return std::clamp(std::pow(num / den, 1.0 / p), lo->value, hi->value);
}

/// Worst-case cap: a mean may not sit more than `offset` above the worst
/// input. Returns the capped value and whether the cap fired.
inline std::pair<double, bool> apply_cap(double mean, double worst, unsigned offset) {
  const double ceiling = worst + static_cast<double>(offset);
  if (mean > ceiling)
    return {ceiling, true};
  return {mean, false};
}

inline double cost_weight(const Asset &a) {
  if (!a.replacement_cost)
    throw Error(ErrorKind::MissingCost, a.describe() + ": replacement cost missing");
  if (!(*a.replacement_cost > 0.0))
    throw Error(ErrorKind::NonPositiveCost,
                a.describe() + ": replacement cost must be positive");
  return std::log10(1.0 + *a.replacement_cost);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Bay-level strategies
// ---------------------------------------------------------------------------

/// Expert-weighted average of asset scores (population-class weights).
///
/// Normalized: sum(HI*W)/sum(W), then capped at worst valid HI + cap offset
/// and clamped to [1, 10]. Raw: plain sum(HI*W), no cap, flagged raw; this
/// is the count-sensitive variant that favours large bays.
inline BayScore agg_weighted_average(const Bay &bay, const WeightCatalog &weights,
                                     const StrategyConfig &cfg) {
  const auto valid = detail::valid_assets(bay);
  BayScore s = detail::start(
      bay, MethodSpec{Method::WeightedAverage, cfg.normalization}, valid);
  if (s.indeterminate())
    return s;

  std::vector<detail::Weighted> items;
  items.reserve(valid.size());
  double worst = 10.0;
  for (const Asset *a : valid) {
    items.push_back({static_cast<double>(a->hi.value()), weights.weight_of(*a)});
    worst = std::min(worst, static_cast<double>(a->hi.value()));
    s.any_critical |= a->bay_critical;
  }
  for (const auto &w : items)
    s.mass += w.weight;

  if (cfg.normalization == Normalization::Raw) {
    double sum = 0.0;
    for (const auto &w : items)
      sum += w.value * w.weight;
    s.raw = true;
    detail::finish(s, sum);
    return s;
  }

  auto [score, capped] =
      detail::apply_cap(detail::weighted_mean(items), worst, cfg.worst_case_cap_offset);
  s.capped = capped;
  detail::finish(s, detail::clamp_score(score));
  return s;
}

/// FMECA severity-weighted average: sum over valid assets of
/// HI_i * S_i / sum S_i, where S_i is the asset type's total severity.
inline BayScore agg_fmeca(const Bay &bay, const SeverityCatalog &severities) {
  const auto valid = detail::valid_assets(bay);
  BayScore s = detail::start(bay, MethodSpec{Method::Fmeca, Normalization::Normalized}, valid);
  if (s.indeterminate())
    return s;

  // Severities are integers; accumulate exactly before the single division.
  long long num = 0, den = 0;
  for (const Asset *a : valid) {
    const long sev = severity_of(*a, severities);
    num += static_cast<long long>(a->hi.value()) * sev;
    den += sev;
    s.any_critical |= a->bay_critical;
  }
  s.mass = static_cast<double>(den);
  detail::finish(s, static_cast<double>(num) / static_cast<double>(den));
  return s;
}

/// Replacement-cost weighting: w_i = log10(1 + cost_i) and a weighted power
/// mean with a (default negative) exponent, so poor assets dominate.
inline BayScore agg_replacement_cost(const Bay &bay, const StrategyConfig &cfg) {
  const auto valid = detail::valid_assets(bay);
  BayScore s = detail::start(
      bay, MethodSpec{Method::ReplacementCost, Normalization::Normalized}, valid);
  if (s.indeterminate())
    return s;

  std::vector<detail::Weighted> items;
  items.reserve(valid.size());
  for (const Asset *a : valid) {
    items.push_back({static_cast<double>(a->hi.value()), detail::cost_weight(*a)});
    s.mass += items.back().weight;
    s.any_critical |= a->bay_critical;
  }
  detail::finish(s, detail::weighted_power_mean(items, cfg.power_mean_exponent));
  return s;
}

/// Minimum score over bay-critical valid assets, or over all valid assets
/// when none is flagged critical.
inline BayScore agg_failure_interpretation(const Bay &bay) {
  const auto valid = detail::valid_assets(bay);
  BayScore s = detail::start(
      bay, MethodSpec{Method::FailureInterpretation, Normalization::Normalized}, valid);
  if (s.indeterminate())
    return s;

  int worst_all = 10, worst_critical = 10;
  for (const Asset *a : valid) {
    worst_all = std::min(worst_all, a->hi.value());
    if (a->bay_critical) {
      s.any_critical = true;
      worst_critical = std::min(worst_critical, a->hi.value());
    }
  }
  s.mass = static_cast<double>(valid.size());
  detail::finish(s, static_cast<double>(s.any_critical ? worst_critical : worst_all));
  return s;
}

/// Dispatches on `cfg.method`. A bay whose invalid (HI = 0) fraction exceeds
/// the configured threshold is indeterminate under every method.
inline BayScore aggregate_bay(const Bay &bay, const Catalogs &catalogs,
                              const StrategyConfig &cfg) {
  const MethodSpec method = method_spec(cfg);
  std::size_t n_invalid = 0;
  for (const auto &a : bay.assets)
    n_invalid += a.hi.valid() ? 0 : 1;
  if (!bay.assets.empty()) {
    const double fraction =
        static_cast<double>(n_invalid) / static_cast<double>(bay.assets.size());
    if (fraction > cfg.invalid_fraction_threshold) {
      BayScore s;
      s.bay_id = bay.bay_id;
      s.method = method;
      s.n_valid = bay.assets.size() - n_invalid;
      s.n_invalid = n_invalid;
      s.indeterminacy = Indeterminacy::InvalidFractionExceeded;
      return s;
    }
  }

  switch (cfg.method) {
  case Method::WeightedAverage: return agg_weighted_average(bay, catalogs.weights, cfg);
  case Method::Fmeca: return agg_fmeca(bay, catalogs.severities);
  case Method::ReplacementCost: return agg_replacement_cost(bay, cfg);
  case Method::FailureInterpretation: return agg_failure_interpretation(bay);
  }
  return agg_fmeca(bay, catalogs.severities);
}

// ---------------------------------------------------------------------------
// Substation roll-up
// ---------------------------------------------------------------------------

struct SubstationScore {
  std::string substation_id;
  std::vector<BayScore> bays;  // sorted by bay_id
  BayScore rollup;             // bay_id holds the substation id
};

/// Applies the strategy one level up, each determinate bay acting as a
/// pseudo-asset carrying its bay score and roll-up mass.
inline BayScore rollup_bays(std::string_view substation_id,
                            std::span<const BayScore> bays, const StrategyConfig &cfg) {
  BayScore s;
  s.bay_id = std::string(substation_id);
  s.method = method_spec(cfg);

  std::vector<const BayScore *> determinate;
  for (const auto &b : bays) {
    s.n_valid += b.n_valid;
    s.n_invalid += b.n_invalid;
    if (!b.indeterminate())
      determinate.push_back(&b);
  }
  if (determinate.empty()) {
    s.indeterminacy = Indeterminacy::NoValidAssets;
    return s;
  }

  std::vector<detail::Weighted> items;
  double worst = 10.0;
  for (const BayScore *b : determinate) {
    items.push_back({*b->score, b->mass});
    s.mass += b->mass;
    s.any_critical |= b->any_critical;
    worst = std::min(worst, *b->score);
  }

  switch (cfg.method) {
  case Method::WeightedAverage:
    if (cfg.normalization == Normalization::Raw) {
      double sum = 0.0;
      for (const auto &w : items)
        sum += w.value;
      s.raw = true;
      detail::finish(s, sum);
    } else {
      auto [score, capped] =
          detail::apply_cap(detail::weighted_mean(items), worst, cfg.worst_case_cap_offset);
      s.capped = capped;
      detail::finish(s, detail::clamp_score(score));
    }
    break;
  case Method::Fmeca:
    detail::finish(s, detail::weighted_mean(items));
    break;
  case Method::ReplacementCost:
    detail::finish(s, detail::weighted_power_mean(items, cfg.power_mean_exponent));
    break;
  case Method::FailureInterpretation: {
    double m = 10.0;
    for (const BayScore *b : determinate)
      if (!s.any_critical || b->any_critical)
        m = std::min(m, *b->score);
    detail::finish(s, m);
    break;
  }
  }
  return s;
}

/// Scores every bay of a substation (optionally on `workers` threads) and
/// rolls the bay scores up. Output order and values do not depend on the
/// worker count. The first error in bay_id order is rethrown.
inline SubstationScore aggregate_substation(const Substation &sub, const Catalogs &catalogs,
                                            const StrategyConfig &cfg,
                                            unsigned workers = 1) {
  cfg.validate();
  std::vector<const Bay *> order;
  order.reserve(sub.bays.size());
  for (const auto &b : sub.bays)
    order.push_back(&b);
  std::sort(order.begin(), order.end(),
            [](const Bay *a, const Bay *b) { return a->bay_id < b->bay_id; });

  std::vector<BayScore> scores(order.size());
  std::vector<std::exception_ptr> errors(order.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < order.size(); i += stride) {
      try {
        scores[i] = aggregate_bay(*order[i], catalogs, cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(1, order.size()));
  if (n_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back(work, t, n_threads);
  }
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  SubstationScore out;
  out.substation_id = sub.substation_id;
  out.bays = std::move(scores);
  out.rollup = rollup_bays(sub.substation_id, out.bays, cfg);
  return out;
}

} // namespace hiagg
