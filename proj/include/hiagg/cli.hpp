#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.
//
// Exit codes: 0 ok, 1 hard data/schema/IO error, 2 data-quality threshold
// exceeded (validate), 3 bad usage.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hiagg/aggregation.hpp"
#include "hiagg/analysis.hpp"
#include "hiagg/ingest.hpp"
#include "hiagg/synthgen.hpp"

namespace hiagg::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kQualityExceeded = 2, kUsage = 3 };

struct CliConfig {
  std::string subcommand;
  std::string in;
  std::string out;
  std::string catalog;
  std::string methods = "weighted_avg,fmeca";
  std::string normalization = "normalized";
  unsigned cap_offset = 3;
  double power_exponent = -2.0;
  double invalid_threshold = 0.25;
  std::optional<std::uint64_t> seed;
  std::string spec;
  std::string format = "json";
  std::string chart;
  unsigned workers = 1;
};

namespace detail {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline StrategyConfig strategy(const CliConfig &c) {
  StrategyConfig s;
  s.normalization = c.normalization == "raw" ? Normalization::Raw : Normalization::Normalized;
  s.worst_case_cap_offset = c.cap_offset;
  s.power_mean_exponent = c.power_exponent;
  s.invalid_fraction_threshold = c.invalid_threshold;
  try {
    s.validate();
  } catch (const Error &e) {
    throw UsageError(e.message());
  }
  return s;
}

inline std::vector<MethodSpec> methods(const CliConfig &c, Normalization norm) {
  std::vector<MethodSpec> out;
  std::stringstream ss(c.methods);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty())
      continue;
    const auto m = parse_method(token, norm);
    if (!m)
      throw UsageError("--methods: unknown method '" + token +
                       "' (weighted_avg, weighted_avg_raw, weighted_avg_normalized, fmeca, "
                       "replacement_cost, failure_interpretation)");
    if (std::find(out.begin(), out.end(), *m) == out.end())
      out.push_back(*m);
  }
  if (out.empty())
    throw UsageError("--methods: at least one method is required");
  return out;
}

inline ReportFormat format(const CliConfig &c) {
  return c.format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
}

inline void deliver(const CliConfig &c, const std::string &text, std::ostream &out) {
  if (c.out.empty())
    out << text;
  else
    write_text(c.out, text);
}

inline JsonValue audit_json(const QualityAudit &audit, double threshold) {
  JsonValue::Array subs;
  for (const auto &s : audit.substations) {
    JsonValue::Array bays;
    for (const auto &b : s.bays)
      bays.emplace_back(JsonValue::Object{{"bay_id", b.bay_id},
                                          {"counts", hiagg::detail::counts_json(b.counts)}});
    subs.emplace_back(JsonValue::Object{
        {"bays", std::move(bays)},
        {"counts", hiagg::detail::counts_json(s.counts)},
        {"mean_bay_invalid_fraction", JsonValue::real(s.mean_bay_invalid_fraction)},
        {"substation_id", s.substation_id}});
  }
  return JsonValue::Object{{"exceeds_threshold", exceeds_threshold(audit, threshold)},
                           {"invalid_threshold", JsonValue::real(threshold)},
                           {"substations", std::move(subs)},
                           {"totals", hiagg::detail::counts_json(audit.totals)}};
}

inline std::string audit_csv(const QualityAudit &audit) {
  std::string out = "substation_id,bay_id,n_assets,n_invalid,invalid_fraction,unknown_type,"
                    "missing_fields,missing_required_year\n";
  auto row = [&](const std::string &sub, const std::string &bay, const QualityCounts &c) {
    out += hiagg::detail::csv_field(sub) + ',' + hiagg::detail::csv_field(bay) + ',' +
           std::to_string(c.n_assets) + ',' + std::to_string(c.n_invalid) + ',' +
           format_fixed4(c.invalid_fraction()) + ',' + std::to_string(c.unknown_type) + ',' +
           std::to_string(c.missing_fields) + ',' + std::to_string(c.missing_required_year) + '\n';
  };
  for (const auto &s : audit.substations) {
    for (const auto &b : s.bays)
      row(s.substation_id, b.bay_id, b.counts);
    row(s.substation_id, "*", s.counts);
  }
  row("*", "*", audit.totals);
  return out;
}

inline int run_validate(const CliConfig &c, std::ostream &out) {
  if (c.in.empty())
    throw UsageError("validate: --in is required");
  const auto fleet = parse_fleet_file(c.in);
  const auto catalogs = parse_catalogs(std::optional<std::string>(c.catalog));
  strategy(c);
  const auto audit = audit_fleet(fleet, catalogs);
  deliver(c, format(c) == ReportFormat::Csv ? audit_csv(audit)
                                             : audit_json(audit, c.invalid_threshold).dump(),
          out);
  return exceeds_threshold(audit, c.invalid_threshold) ? kQualityExceeded : kOk;
}

inline int run_compare(const CliConfig &c, std::ostream &out, bool single) {
  if (c.in.empty())
    throw UsageError(c.subcommand + ": --in is required");
  const StrategyConfig cfg = strategy(c);
  const auto ms = methods(c, cfg.normalization);
  if (single && ms.size() != 1)
    throw UsageError("aggregate: exactly one method is required");
  const auto fleet = parse_fleet_file(c.in);
  const auto catalogs = parse_catalogs(std::optional<std::string>(c.catalog));
  const auto report = compare_methods(fleet, ms, catalogs, cfg, c.workers);
  deliver(c, emit_report(report, format(c)), out);
  if (!c.chart.empty())
    write_text(c.chart, emit_chart(report));
  return kOk;
}

inline int run_synth(const CliConfig &c, std::ostream &out) {
  FleetSpec spec;
  if (!c.spec.empty()) {
    std::ifstream in(c.spec, std::ios::binary);
    if (!in)
      throw Error(ErrorKind::Unreadable, "cannot open spec", Provenance{c.spec, {}, {}});
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
      throw Error(ErrorKind::InfeasibleSpec, e.what(), Provenance{c.spec, {}, {}});
    }
    spec = fleet_spec_from_json(doc, c.spec);
  }
  if (c.seed)
    spec.seed = *c.seed;
  deliver(c, serialize_fleet(generate_fleet(spec)), out);
  return kOk;
}

inline int run_chart(const CliConfig &c, std::ostream &out) {
  if (c.in.empty())
    throw UsageError("chart: --in (a JSON report) is required");
  deliver(c, emit_chart(read_report(c.in)), out);
  return kOk;
}

} // namespace detail

/// Parses `args` (without the program name) and runs the subcommand.
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Aggregated health index scoring for substation asset hierarchies", "hiagg"};
  app.require_subcommand(1);
  CliConfig c;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--in", c.in, "Input file");
    sub->add_option("--out", c.out, "Output file (default: standard output)");
  };
  auto add_strategy = [&](CLI::App *sub) {
    sub->add_option("--catalog", c.catalog, "Severity/weight catalog (JSON)");
    sub->add_option("--normalization", c.normalization, "Weighted-average mode")
        ->check(CLI::IsMember({"raw", "normalized"}));
    sub->add_option("--cap-offset", c.cap_offset, "Worst-case cap offset");
    sub->add_option("--power-exponent", c.power_exponent, "Replacement-cost power-mean exponent");
    sub->add_option("--invalid-threshold", c.invalid_threshold, "Invalid-fraction threshold")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--workers", c.workers, "Worker threads for bay aggregation")
        ->check(CLI::PositiveNumber);
  };

  auto *validate = app.add_subcommand("validate", "Audit a fleet file for data quality");
  add_common(validate);
  validate->add_option("--catalog", c.catalog, "Severity/weight catalog (JSON)");
  validate->add_option("--invalid-threshold", c.invalid_threshold, "Invalid-fraction threshold")
      ->check(CLI::Range(0.0, 1.0));
  validate->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto *aggregate = app.add_subcommand("aggregate", "Score every bay under one method");
  add_common(aggregate);
  add_strategy(aggregate);
  aggregate->add_option("--method,--methods", c.methods, "Aggregation method");
  aggregate->add_option("--chart", c.chart, "Also write an SVG chart here");

  auto *compare = app.add_subcommand("compare", "Compare several methods bay by bay");
  add_common(compare);
  add_strategy(compare);
  compare->add_option("--methods", c.methods, "Comma-separated methods");
  compare->add_option("--chart", c.chart, "Also write an SVG chart here");

  auto *synth = app.add_subcommand("synth", "Generate a synthetic fleet file");
  synth->add_option("--out", c.out, "Output fleet file (default: standard output)");
  synth->add_option("--spec", c.spec, "Fleet spec (JSON)");
  synth->add_option("--seed", c.seed, "Seed (overrides the spec)");

  auto *chart = app.add_subcommand("chart", "Render an SVG chart from a JSON report");
  add_common(chart);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  for (auto *sub : app.get_subcommands())
    c.subcommand = sub->get_name();

  try {
    if (validate->parsed())
      return detail::run_validate(c, out);
    if (aggregate->parsed()) {
      if (aggregate->count("--method") == 0)
        throw detail::UsageError("aggregate: --method is required");
      return detail::run_compare(c, out, true);
    }
    if (compare->parsed())
      return detail::run_compare(c, out, false);
    if (synth->parsed())
      return detail::run_synth(c, out);
    return detail::run_chart(c, out);
  } catch (const detail::UsageError &e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidConfig ? kUsage : kDataError;
  }
}

inline int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

} // namespace hiagg::cli
