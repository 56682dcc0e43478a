#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hiagg/aggregation.hpp"
#include "hiagg/core_model.hpp"
#include "hiagg/fixed_json.hpp"
#include "hiagg/ingest.hpp"

namespace hiagg {

// ---------------------------------------------------------------------------
// Rank statistics
// ---------------------------------------------------------------------------

/// 1-based ranks with ties given the mean of the ranks they span.
inline std::vector<double> mid_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]])
      ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k)
      ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation (Pearson on mid-ranks). 1.0 when both inputs
/// induce the same ordering, including the all-tied case; absent for fewer
/// than two points or when exactly one side is constant.
inline std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    return std::nullopt;
  const auto ra = mid_ranks(a);
  const auto rb = mid_ranks(b);
  if (ra == rb)
    return 1.0;
  const double n = static_cast<double>(ra.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0)
    return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Percentile position of each value among the others: (midrank - 1) /
/// (n - 1), so the lowest is 0 and the highest 1. A single value sits at 0.5.
inline std::vector<double> percentile_ranks(std::span<const double> values) {
  if (values.size() == 1)
    return {0.5};
  auto ranks = mid_ranks(values);
  const double denom = static_cast<double>(values.size()) - 1.0;
  for (auto &r : ranks)
    r = (r - 1.0) / denom;
  return ranks;
}

// ---------------------------------------------------------------------------
// Small-bay bias diagnostics
// ---------------------------------------------------------------------------

struct BiasConfig {
  double percentile_gap = 0.25;
};

struct BiasFinding {
  std::string bay_id;
  std::size_t n_assets = 0;
  double raw_percentile = 0.0;
  double fmeca_percentile = 0.0;
  double gap = 0.0;
};

struct BiasReport {
  double percentile_gap = 0.25;
  double median_bay_size = 0.0;
  std::vector<BiasFinding> flagged;   // bay_id order
  std::vector<std::string> excluded;  // indeterminate or failing bays
};

namespace detail {

inline double median(std::vector<double> xs) {
  if (xs.empty())
    return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

inline std::vector<const Bay *> sorted_bays(const Substation &sub) {
  std::vector<const Bay *> out;
  for (const auto &b : sub.bays)
    out.push_back(&b);
  std::sort(out.begin(), out.end(),
            [](const Bay *a, const Bay *b) { return a->bay_id < b->bay_id; });
  return out;
}

inline std::optional<BayScore> try_aggregate(const Bay &bay, const Catalogs &catalogs,
                                             const StrategyConfig &cfg) {
  try {
    BayScore s = aggregate_bay(bay, catalogs, cfg);
    if (s.indeterminate())
      return std::nullopt;
    return s;
  } catch (const Error &) {
    return std::nullopt;
  }
}

} // namespace detail

/// Flags bays whose unnormalized weighted-sum score ranks very differently
/// from their FMECA score and that are smaller than the median bay, the
/// signature of few-asset bays being dragged down by count-sensitive
/// aggregation.
inline BiasReport bias_diagnostics(const Substation &sub, const Catalogs &catalogs,
                                   const StrategyConfig &cfg, const BiasConfig &bias = {}) {
  StrategyConfig raw_cfg = cfg;
  raw_cfg.method = Method::WeightedAverage;
  raw_cfg.normalization = Normalization::Raw;
  StrategyConfig fmeca_cfg = cfg;
  fmeca_cfg.method = Method::Fmeca;

  BiasReport report;
  report.percentile_gap = bias.percentile_gap;

  std::vector<const Bay *> kept;
  std::vector<double> raw_scores, fmeca_scores, sizes;
  for (const Bay *bay : detail::sorted_bays(sub)) {
    auto raw = detail::try_aggregate(*bay, catalogs, raw_cfg);
    auto fm = detail::try_aggregate(*bay, catalogs, fmeca_cfg);
    if (!raw || !fm) {
      report.excluded.push_back(bay->bay_id);
      continue;
    }
    kept.push_back(bay);
    raw_scores.push_back(*raw->score);
    fmeca_scores.push_back(*fm->score);
    sizes.push_back(static_cast<double>(bay->assets.size()));
  }
  if (kept.empty())
    return report;

  report.median_bay_size = detail::median(sizes);
  const auto raw_pct = percentile_ranks(raw_scores);
  const auto fm_pct = percentile_ranks(fmeca_scores);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double gap = std::fabs(raw_pct[i] - fm_pct[i]);
    if (sizes[i] < report.median_bay_size && gap > bias.percentile_gap)
      report.flagged.push_back(BiasFinding{kept[i]->bay_id, kept[i]->assets.size(),
                                           raw_pct[i], fm_pct[i], gap});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Method comparison
// ---------------------------------------------------------------------------

/// Outcome of one method on one bay (or substation roll-up): a score or an
/// error message.
struct MethodCell {
  std::optional<BayScore> result;
  std::optional<std::string> error;

  std::optional<double> score() const {
    return result ? result->score : std::nullopt;
  }
};

struct BayComparison {
  std::string bay_id;
  std::size_t n_assets = 0;
  std::vector<MethodCell> cells;               // aligned with report methods
  std::vector<std::optional<double>> deltas;   // aligned with method pairs
};

struct MethodPair {
  std::size_t first;
  std::size_t second;
};

struct PairCorrelation {
  MethodPair pair;
  std::optional<double> spearman;
};

struct SubstationComparison {
  std::string substation_id;
  std::array<double, 5> band_fractions{};  // indexed like kAllBands
  std::vector<BayComparison> bays;         // bay_id order
  std::vector<MethodCell> rollups;         // aligned with report methods
  std::vector<PairCorrelation> correlations;
  SubstationAudit audit;
  BiasReport bias;
};

struct ComparisonReport {
  std::vector<MethodSpec> methods;
  StrategyConfig config;
  std::vector<SubstationComparison> substations;  // substation_id order
  QualityCounts totals;

  std::vector<MethodPair> pairs() const {
    std::vector<MethodPair> out;
    for (std::size_t i = 0; i < methods.size(); ++i)
      for (std::size_t j = i + 1; j < methods.size(); ++j)
        out.push_back({i, j});
    return out;
  }
};

inline std::array<double, 5> band_distribution(const Substation &sub) {
  std::array<double, 5> counts{};
  std::size_t n = 0;
  for (const auto &bay : sub.bays)
    for (const auto &a : bay.assets) {
      counts[static_cast<std::size_t>(band_of(a.hi))] += 1.0;
      ++n;
    }
  if (n > 0)
    for (auto &c : counts)
      c /= static_cast<double>(n);
  return counts;
}

inline StrategyConfig config_for(const StrategyConfig &base, const MethodSpec &m) {
  StrategyConfig c = base;
  c.method = m.method;
  c.normalization = m.normalization;
  return c;
}

inline SubstationComparison compare_substation(const Substation &sub,
                                               std::span<const MethodSpec> methods,
                                               const Catalogs &catalogs,
                                               const StrategyConfig &cfg,
                                               unsigned workers = 1,
                                               const BiasConfig &bias = {}) {
  const auto bays = detail::sorted_bays(sub);
  const std::size_t n_methods = methods.size();

  SubstationComparison out;
  out.substation_id = sub.substation_id;
  out.band_fractions = band_distribution(sub);
  out.audit = audit_substation(sub, catalogs);
  out.bias = bias_diagnostics(sub, catalogs, cfg, bias);

  // Fill the bay x method grid; each cell is independent.
  std::vector<MethodCell> grid(bays.size() * n_methods);
  std::vector<StrategyConfig> configs;
  for (const auto &m : methods)
    configs.push_back(config_for(cfg, m));
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < grid.size(); k += stride) {
      const std::size_t b = k / n_methods, m = k % n_methods;
      try {
        grid[k].result = aggregate_bay(*bays[b], catalogs, configs[m]);
      } catch (const Error &e) {
        grid[k].error = e.what();
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(1, grid.size()));
  if (n_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back(work, t, n_threads);
  }

  std::vector<MethodPair> pairs;
  for (std::size_t i = 0; i < n_methods; ++i)
    for (std::size_t j = i + 1; j < n_methods; ++j)
      pairs.push_back({i, j});

  for (std::size_t b = 0; b < bays.size(); ++b) {
    BayComparison row;
    row.bay_id = bays[b]->bay_id;
    row.n_assets = bays[b]->assets.size();
    row.cells.assign(grid.begin() + static_cast<std::ptrdiff_t>(b * n_methods),
                     grid.begin() + static_cast<std::ptrdiff_t>((b + 1) * n_methods));
    for (const auto &p : pairs) {
      const auto a = row.cells[p.first].score(), c = row.cells[p.second].score();
      row.deltas.push_back(a && c ? std::optional<double>(*c - *a) : std::nullopt);
    }
    out.bays.push_back(std::move(row));
  }

  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodCell cell;
    std::vector<BayScore> scores;
    std::size_t failed = 0;
    for (const auto &row : out.bays) {
      if (row.cells[m].error)
        ++failed;
      else
        scores.push_back(*row.cells[m].result);
    }
    if (failed > 0)
      cell.error = std::to_string(failed) + " bay(s) failed under " + label(methods[m]);
    else
      cell.result = rollup_bays(sub.substation_id, scores, configs[m]);
    out.rollups.push_back(std::move(cell));
  }

  for (const auto &p : pairs) {
    std::vector<double> xs, ys;
    for (const auto &row : out.bays) {
      const auto a = row.cells[p.first].score(), c = row.cells[p.second].score();
      if (a && c) {
        xs.push_back(*a);
        ys.push_back(*c);
      }
    }
    out.correlations.push_back({p, spearman(xs, ys)});
  }
  return out;
}

/// Aggregates every bay of every substation under every method and records
/// per-bay deltas, pairwise Spearman correlations, the quality audit and
/// small-bay bias findings. Failing cells carry their error message and do
/// not abort the rest of the report.
inline ComparisonReport compare_methods(const Fleet &fleet, std::span<const MethodSpec> methods,
                                        const Catalogs &catalogs, const StrategyConfig &cfg,
                                        unsigned workers = 1, const BiasConfig &bias = {}) {
  if (methods.empty())
    throw Error(ErrorKind::InvalidConfig, "at least one method is required");
  cfg.validate();
  ComparisonReport report;
  report.methods.assign(methods.begin(), methods.end());
  report.config = cfg;

  std::vector<const Substation *> subs;
  for (const auto &s : fleet)
    subs.push_back(&s);
  std::sort(subs.begin(), subs.end(), [](const Substation *a, const Substation *b) {
    return a->substation_id < b->substation_id;
  });
  for (const Substation *s : subs) {
    report.substations.push_back(compare_substation(*s, methods, catalogs, cfg, workers, bias));
    report.totals += report.substations.back().audit.counts;
  }
  return report;
}

inline ComparisonReport compare_methods(const Substation &sub, std::span<const MethodSpec> methods,
                                        const Catalogs &catalogs, const StrategyConfig &cfg,
                                        unsigned workers = 1, const BiasConfig &bias = {}) {
  return compare_methods(Fleet{sub}, methods, catalogs, cfg, workers, bias);
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

enum class ReportFormat { Json, Csv };

inline constexpr std::string_view kReportSchema = "hiagg.comparison/1";

namespace detail {

inline JsonValue counts_json(const QualityCounts &c) {
  return JsonValue::Object{
      {"invalid_fraction", JsonValue::real(c.invalid_fraction())},
      {"missing_fields", c.missing_fields},
      {"missing_required_year", c.missing_required_year},
      {"n_assets", c.n_assets},
      {"n_invalid", c.n_invalid},
      {"unknown_type", c.unknown_type},
  };
}

inline JsonValue cell_json(const MethodCell &cell) {
  JsonValue::Object o;
  if (cell.error) {
    o = {{"error", *cell.error}, {"indeterminate", true}, {"score", nullptr}};
    return o;
  }
  const BayScore &s = *cell.result;
  o = {
      {"band", s.band ? JsonValue(to_string(*s.band)) : JsonValue()},
      {"capped", s.capped},
      {"error", nullptr},
      {"indeterminacy", to_string(s.indeterminacy)},
      {"indeterminate", s.indeterminate()},
      {"n_invalid", s.n_invalid},
      {"n_valid", s.n_valid},
      {"raw", s.raw},
      {"score", JsonValue::optional_real(s.score)},
  };
  if (s.method.method == Method::FailureInterpretation && s.band)
    o.emplace_back("meaning", failure_meaning(*s.band));
  return o;
}

inline std::string pair_key(const ComparisonReport &r, const MethodPair &p) {
  return label(r.methods[p.first]) + ":" + label(r.methods[p.second]);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

} // namespace detail

inline JsonValue report_to_json(const ComparisonReport &r) {
  const auto pairs = r.pairs();
  JsonValue::Array methods;
  for (const auto &m : r.methods)
    methods.emplace_back(label(m));

  JsonValue::Array subs;
  for (const auto &s : r.substations) {
    JsonValue::Object bands;
    for (std::size_t i = 0; i < kAllBands.size(); ++i)
      bands.emplace_back(std::string(to_string(kAllBands[i])), JsonValue::real(s.band_fractions[i]));

    JsonValue::Array bays;
    for (const auto &b : s.bays) {
      JsonValue::Object scores, deltas;
      for (std::size_t m = 0; m < r.methods.size(); ++m)
        scores.emplace_back(label(r.methods[m]), detail::cell_json(b.cells[m]));
      for (std::size_t p = 0; p < pairs.size(); ++p)
        deltas.emplace_back(detail::pair_key(r, pairs[p]), JsonValue::optional_real(b.deltas[p]));
      bays.emplace_back(JsonValue::Object{{"bay_id", b.bay_id},
                                          {"deltas", std::move(deltas)},
                                          {"n_assets", b.n_assets},
                                          {"scores", std::move(scores)}});
    }

    JsonValue::Object rollup;
    for (std::size_t m = 0; m < r.methods.size(); ++m)
      rollup.emplace_back(label(r.methods[m]), detail::cell_json(s.rollups[m]));

    JsonValue::Array correlations;
    for (const auto &c : s.correlations)
      correlations.emplace_back(JsonValue::Object{
          {"method_a", label(r.methods[c.pair.first])},
          {"method_b", label(r.methods[c.pair.second])},
          {"spearman", JsonValue::optional_real(c.spearman)}});

    JsonValue::Array audit_bays;
    for (const auto &b : s.audit.bays) {
      JsonValue counts = detail::counts_json(b.counts);
      audit_bays.emplace_back(JsonValue::Object{{"bay_id", b.bay_id}, {"counts", std::move(counts)}});
    }

    JsonValue::Array flagged, excluded;
    for (const auto &f : s.bias.flagged)
      flagged.emplace_back(JsonValue::Object{{"bay_id", f.bay_id},
                                             {"fmeca_percentile", JsonValue::real(f.fmeca_percentile)},
                                             {"gap", JsonValue::real(f.gap)},
                                             {"n_assets", f.n_assets},
                                             {"raw_percentile", JsonValue::real(f.raw_percentile)}});
    for (const auto &e : s.bias.excluded)
      excluded.emplace_back(e);

    subs.emplace_back(JsonValue::Object{
        {"audit", JsonValue::Object{{"bays", std::move(audit_bays)},
                                    {"counts", detail::counts_json(s.audit.counts)},
                                    {"mean_bay_invalid_fraction",
                                     JsonValue::real(s.audit.mean_bay_invalid_fraction)}}},
        {"band_distribution", std::move(bands)},
        {"bays", std::move(bays)},
        {"bias", JsonValue::Object{{"excluded", std::move(excluded)},
                                   {"flagged", std::move(flagged)},
                                   {"median_bay_size", JsonValue::real(s.bias.median_bay_size)},
                                   {"percentile_gap", JsonValue::real(s.bias.percentile_gap)}}},
        {"correlations", std::move(correlations)},
        {"rollup", std::move(rollup)},
        {"substation_id", s.substation_id},
    });
  }

  return JsonValue::Object{
      {"config", JsonValue::Object{
                     {"cap_offset", static_cast<unsigned long>(r.config.worst_case_cap_offset)},
                     {"invalid_threshold", JsonValue::real(r.config.invalid_fraction_threshold)},
                     {"normalization", to_string(r.config.normalization)},
                     {"power_exponent", JsonValue::real(r.config.power_mean_exponent)}}},
      {"fleet_audit", detail::counts_json(r.totals)},
      {"methods", std::move(methods)},
      {"schema", kReportSchema},
      {"substations", std::move(subs)},
  };
}

inline constexpr std::string_view kReportCsvHeader =
    "substation_id,bay_id,method,score,band,n_valid,n_invalid,capped,raw,indeterminate,error";

inline std::string emit_report(const ComparisonReport &r, ReportFormat format) {
  if (format == ReportFormat::Json)
    return report_to_json(r).dump();

  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto &s : r.substations)
    for (const auto &b : s.bays)
      for (std::size_t m = 0; m < r.methods.size(); ++m) {
        const MethodCell &c = b.cells[m];
        out += detail::csv_field(s.substation_id) + ',' + detail::csv_field(b.bay_id) + ',' +
               label(r.methods[m]) + ',';
        if (c.error) {
          out += ",,,,,,true," + detail::csv_field(*c.error) + '\n';
          continue;
        }
        const BayScore &x = *c.result;
        out += (x.score ? format_fixed4(*x.score) : "") + ',' +
               (x.band ? std::string(to_string(*x.band)) : "") + ',' +
               std::to_string(x.n_valid) + ',' + std::to_string(x.n_invalid) + ',' +
               (x.capped ? "true" : "false") + ',' + (x.raw ? "true" : "false") + ',' +
               (x.indeterminate() ? "true" : "false") + ",\n";
      }
  return out;
}

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::UnwritableOutput, "cannot open for writing", Provenance{path, {}, {}});
  out << text;
  out.flush();
  if (!out)
    throw Error(ErrorKind::UnwritableOutput, "write failed", Provenance{path, {}, {}});
}

// ---------------------------------------------------------------------------
// Reading a JSON report back (used by the chart command)
// ---------------------------------------------------------------------------

/// Rebuilds the fields of a report that the chart depends on: methods,
/// substations, band fractions, per-bay scores and indeterminate/error
/// state. Scores come back at their printed 4-decimal precision.
inline ComparisonReport report_from_json(const nlohmann::json &doc, const std::string &source) {
  auto bad = [&](const std::string &msg) {
    throw Error(ErrorKind::MalformedReport, msg, Provenance{source, {}, {}});
  };
  ComparisonReport r;
  try {
    if (doc.at("schema").get<std::string>() != kReportSchema)
      bad("unsupported report schema");
    std::vector<std::string> labels;
    for (const auto &m : doc.at("methods")) {
      const auto spec = parse_method(m.get<std::string>(), Normalization::Normalized);
      if (!spec)
        bad("unknown method '" + m.get<std::string>() + "'");
      r.methods.push_back(*spec);
      labels.push_back(m.get<std::string>());
    }
    for (const auto &sj : doc.at("substations")) {
      SubstationComparison s;
      s.substation_id = sj.at("substation_id").get<std::string>();
      for (std::size_t i = 0; i < kAllBands.size(); ++i)
        s.band_fractions[i] =
            sj.at("band_distribution").at(std::string(to_string(kAllBands[i]))).get<double>();
      for (const auto &bj : sj.at("bays")) {
        BayComparison b;
        b.bay_id = bj.at("bay_id").get<std::string>();
        b.n_assets = bj.at("n_assets").get<std::size_t>();
        for (std::size_t m = 0; m < labels.size(); ++m) {
          const auto &cj = bj.at("scores").at(labels[m]);
          MethodCell cell;
          if (!cj.at("error").is_null()) {
            cell.error = cj.at("error").get<std::string>();
          } else {
            BayScore x;
            x.bay_id = b.bay_id;
            x.method = r.methods[m];
            x.raw = cj.at("raw").get<bool>();
            x.capped = cj.at("capped").get<bool>();
            x.n_valid = cj.at("n_valid").get<std::size_t>();
            x.n_invalid = cj.at("n_invalid").get<std::size_t>();
            if (cj.at("indeterminate").get<bool>()) {
              x.indeterminacy = cj.at("indeterminacy").get<std::string>() == "no_valid_assets"
                                    ? Indeterminacy::NoValidAssets
                                    : Indeterminacy::InvalidFractionExceeded;
            } else {
              x.score = cj.at("score").get<double>();
              x.band = band_of_aggregate(*x.score);
            }
            cell.result = x;
          }
          b.cells.push_back(std::move(cell));
        }
        s.bays.push_back(std::move(b));
      }
      r.substations.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception &e) {
    bad(e.what());
  }
  return r;
}

inline ComparisonReport read_report(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Unreadable, "cannot open report", Provenance{path, {}, {}});
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorKind::MalformedReport, e.what(),
                Provenance{path, {}, "byte " + std::to_string(e.byte)});
  }
  return report_from_json(doc, path);
}

// ---------------------------------------------------------------------------
// SVG chart
// ---------------------------------------------------------------------------

namespace chart {

inline constexpr double kPlotHeight = 250.0;
inline constexpr double kPixelsPerPoint = kPlotHeight / 10.0;  // y-axis 0..10
inline constexpr double kBarWidth = 14.0;
inline constexpr double kClusterGap = 18.0;
inline constexpr double kLeft = 60.0;
inline constexpr double kTop = 40.0;
inline constexpr double kPanelHeight = 380.0;
inline constexpr double kDonutArea = 260.0;
inline constexpr double kDonutRadius = 70.0;

inline constexpr std::array<std::string_view, 6> kMethodColors = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"};

constexpr std::string_view band_color(ColorBand b) {
  switch (b) {
  case ColorBand::Green: return "#2e7d32";
  case ColorBand::Orange: return "#ef6c00";
  case ColorBand::Red: return "#c62828";
  case ColorBand::Violet: return "#6a1b9a";
  case ColorBand::White: return "#f5f5f5";
  }
  return "#f5f5f5";
}

inline std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    case '\'': out += "&apos;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace chart

/// Renders one panel per substation: grouped bars (one cluster per bay, one
/// bar per method) on a 0-10 axis, and a donut of the asset band
/// distribution. Indeterminate or failed cells draw a hatched placeholder.
/// Geometry uses scores at their printed 4-decimal precision, so a chart
/// drawn from a report read back from JSON is byte-identical.
inline std::string emit_chart(const ComparisonReport &r) {
  using namespace chart;
  const std::size_t n_methods = r.methods.size();
  const double cluster_w = static_cast<double>(n_methods) * kBarWidth + kClusterGap;

  std::size_t max_bays = 1;
  for (const auto &s : r.substations)
    max_bays = std::max(max_bays, s.bays.size());
  const double width = kLeft + static_cast<double>(max_bays) * cluster_w + kDonutArea;
  const double height = std::max<double>(1, static_cast<double>(r.substations.size())) * kPanelHeight;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
    << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
    << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  o << "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\">"
       "<path d=\"M0,6 L6,0\" stroke=\"#888888\" stroke-width=\"1\"/></pattern></defs>\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  for (std::size_t si = 0; si < r.substations.size(); ++si) {
    const auto &s = r.substations[si];
    const double y0 = static_cast<double>(si) * kPanelHeight + kTop;
    const double base = y0 + kPlotHeight;
    o << "<g class=\"substation\" data-substation=\"" << xml_escape(s.substation_id) << "\">\n";
    o << "<text class=\"title\" x=\"" << num(kLeft) << "\" y=\"" << num(y0 - 16)
      << "\" font-size=\"13\">Substation " << xml_escape(s.substation_id) << "</text>\n";

    // Axis with ticks every 2 points.
    const double plot_right = kLeft + static_cast<double>(std::max<std::size_t>(1, s.bays.size())) * cluster_w;
    o << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(y0) << "\" x2=\""
      << num(kLeft) << "\" y2=\"" << num(base) << "\" stroke=\"#000000\"/>\n";
    o << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(base) << "\" x2=\""
      << num(plot_right) << "\" y2=\"" << num(base) << "\" stroke=\"#000000\"/>\n";
    for (int t = 0; t <= 10; t += 2) {
      const double y = base - t * kPixelsPerPoint;
      o << "<line class=\"tick\" x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(plot_right) << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n";
      o << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 3)
        << "\" text-anchor=\"end\">" << t << "</text>\n";
    }
    o << "<text x=\"" << num(14) << "\" y=\"" << num(y0 + kPlotHeight / 2)
      << "\" transform=\"rotate(-90 14 " << num(y0 + kPlotHeight / 2)
      << ")\" text-anchor=\"middle\">HI score</text>\n";

    for (std::size_t b = 0; b < s.bays.size(); ++b) {
      const auto &bay = s.bays[b];
      const double cx = kLeft + kClusterGap / 2 + static_cast<double>(b) * cluster_w;
      o << "<g class=\"cluster\" data-bay=\"" << xml_escape(bay.bay_id) << "\">\n";
      for (std::size_t m = 0; m < n_methods; ++m) {
        const double x = cx + static_cast<double>(m) * kBarWidth;
        const auto score = bay.cells[m].score();
        const std::string method = label(r.methods[m]);
        if (!score) {
          o << "<rect class=\"bar placeholder\" data-bay=\"" << xml_escape(bay.bay_id)
            << "\" data-method=\"" << method << "\" x=\"" << num(x) << "\" y=\"" << num(y0)
            << "\" width=\"" << num(kBarWidth - 2) << "\" height=\"" << num(kPlotHeight)
            << "\" fill=\"url(#hatch)\" stroke=\"#888888\"/>\n";
          o << "<text class=\"placeholder-label\" x=\"" << num(x + (kBarWidth - 2) / 2) << "\" y=\""
            << num(base - 4) << "\" text-anchor=\"middle\" font-size=\"8\">n/a</text>\n";
          continue;
        }
        const double v = round4(*score);
        const bool clipped = v > 10.0;
        const double h = std::min(v, 10.0) * kPixelsPerPoint;
        o << "<rect class=\"bar" << (clipped ? " clipped" : "") << "\" data-bay=\""
          << xml_escape(bay.bay_id) << "\" data-method=\"" << method << "\" data-score=\""
          << format_fixed4(v) << "\" x=\"" << num(x) << "\" y=\"" << num(base - h)
          << "\" width=\"" << num(kBarWidth - 2) << "\" height=\"" << num(h) << "\" fill=\""
          << kMethodColors[m % kMethodColors.size()] << "\"/>\n";
      }
      const double lx = cx + static_cast<double>(n_methods) * kBarWidth / 2;
      o << "<text class=\"bay-label\" x=\"" << num(lx) << "\" y=\"" << num(base + 12)
        << "\" transform=\"rotate(45 " << num(lx) << ' ' << num(base + 12) << ")\">"
        << xml_escape(bay.bay_id) << "</text>\n";
      o << "</g>\n";
    }

    // Legend.
    for (std::size_t m = 0; m < n_methods; ++m) {
      const double ly = y0 + static_cast<double>(m) * 14;
      const double lx = plot_right + 12;
      o << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\""
        << kMethodColors[m % kMethodColors.size()] << "\"/>\n";
      o << "<text x=\"" << num(lx + 14) << "\" y=\"" << num(ly + 9) << "\">" << label(r.methods[m])
        << "</text>\n";
    }

    // Band-distribution donut.
    const double dcx = plot_right + kDonutArea / 2 + 10;
    const double dcy = y0 + 60 + kDonutRadius;
    const double circumference = 2.0 * 3.14159265358979323846 * kDonutRadius;
    double offset = 0.0;
    o << "<g class=\"donut\">\n";
    for (std::size_t i = 0; i < kAllBands.size(); ++i) {
      const double frac = round4(s.band_fractions[i]);
      const double len = frac * circumference;
      o << "<circle class=\"donut-segment\" data-band=\"" << to_string(kAllBands[i])
        << "\" data-fraction=\"" << format_fixed4(frac) << "\" cx=\"" << num(dcx) << "\" cy=\""
        << num(dcy) << "\" r=\"" << num(kDonutRadius) << "\" fill=\"none\" stroke=\""
        << band_color(kAllBands[i]) << "\" stroke-width=\"26\" stroke-dasharray=\"" << num(len)
        << ' ' << num(circumference - len) << "\" stroke-dashoffset=\"" << num(-offset)
        << "\" transform=\"rotate(-90 " << num(dcx) << ' ' << num(dcy) << ")\"/>\n";
      offset += len;
    }
    o << "<text x=\"" << num(dcx) << "\" y=\"" << num(dcy + 4)
      << "\" text-anchor=\"middle\">assets by band</text>\n";
    o << "</g>\n";
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

} // namespace hiagg
