#include <gtest/gtest.h>

#include <regex>

#include "hiagg/analysis.hpp"
#include "hiagg/synthgen.hpp"
#include "test_support.hpp"

using namespace hiagg;
using hiagg::testing::make_asset;
using hiagg::testing::size_ladder_substation;

namespace {

const MethodSpec kRaw{Method::WeightedAverage, Normalization::Raw};
const MethodSpec kNorm{Method::WeightedAverage, Normalization::Normalized};
const MethodSpec kFmeca{Method::Fmeca, Normalization::Normalized};

Substation two_bay_substation() {
  return Substation{"S1",
                    {Bay{"B2", {make_asset("a", "circuit_breaker", 8), make_asset("b", "earthing", 3)}},
                     Bay{"B1", {make_asset("c", "disconnector", 6)}}}};
}

}  // namespace

// ---- formatting ----------------------------------------------------------------

TEST(FormatFixed4, RoundsHalfUp) {
  EXPECT_EQ(format_fixed4(6.15075), "6.1508");
  EXPECT_EQ(format_fixed4(6.150779896013865), "6.1508");
  EXPECT_EQ(format_fixed4(7.0), "7.0000");
  EXPECT_EQ(format_fixed4(9.99995), "10.0000");
  EXPECT_EQ(format_fixed4(0.00004), "0.0000");
  EXPECT_EQ(format_fixed4(-0.00004), "0.0000");
  EXPECT_EQ(format_fixed4(-1.23456), "-1.2346");
  EXPECT_EQ(format_fixed4(1234567.0), "1234567.0000");
}

// ---- rank statistics -------------------------------------------------------------

TEST(Spearman, Basics) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {10, 20, 30, 40}, c = {4, 3, 2, 1};
  EXPECT_EQ(*spearman(a, b), 1.0);
  EXPECT_NEAR(*spearman(a, c), -1.0, 1e-15);
  const std::vector<double> same = {5, 5, 5, 5};
  EXPECT_EQ(*spearman(same, same), 1.0);
  EXPECT_FALSE(spearman(a, same));
  const std::vector<double> one = {1};
  EXPECT_FALSE(spearman(one, one));
}

TEST(Spearman, TiesAreMidRanked) {
  const std::vector<double> v = {3, 1, 3, 2};
  EXPECT_EQ(mid_ranks(v), (std::vector<double>{3.5, 1, 3.5, 2}));
  // Against a brute-force Pearson on hand-computed ranks.
  const std::vector<double> a = {1, 2, 2, 3}, b = {1, 3, 2, 4};
  // ranks a: 1, 2.5, 2.5, 4; ranks b: 1, 3, 2, 4 -> r = 4.5 / sqrt(4.5 * 5)
  EXPECT_NEAR(*spearman(a, b), 4.5 / std::sqrt(4.5 * 5.0), 1e-12);
}

TEST(Spearman, AlwaysWithinUnitInterval) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> v(1, 10);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(8), b(8);
    for (int j = 0; j < 8; ++j) {
      a[j] = v(rng);
      b[j] = v(rng);
    }
    if (auto r = spearman(a, b)) {
      EXPECT_GE(*r, -1.0);
      EXPECT_LE(*r, 1.0);
    }
  }
}

// ---- bias diagnostics ----------------------------------------------------------------

TEST(BiasDiagnostics, SmallBaysFlagged) {
  const Substation sub = size_ladder_substation();
  const BiasReport r = bias_diagnostics(sub, Catalogs{}, StrategyConfig{});
  ASSERT_EQ(r.flagged.size(), 3u);
  EXPECT_EQ(r.flagged[0].bay_id, "BAY01");
  EXPECT_EQ(r.flagged[1].bay_id, "BAY02");
  EXPECT_EQ(r.flagged[2].bay_id, "BAY03");
  EXPECT_EQ(r.median_bay_size, 5.5);
  EXPECT_NEAR(r.flagged[0].gap, 0.5, 1e-12);
  EXPECT_TRUE(r.excluded.empty());
}

TEST(BiasDiagnostics, EqualSizesNeverFlag) {
  Substation sub{"S", {}};
  std::mt19937_64 rng(8);
  for (int i = 0; i < 8; ++i)
    sub.bays.push_back(hiagg::testing::random_bay(rng, {4, 4, false}, "B" + std::to_string(i)));
  EXPECT_TRUE(bias_diagnostics(sub, Catalogs{}, StrategyConfig{}).flagged.empty());
}

TEST(BiasDiagnostics, IndeterminateBaysExcluded) {
  Substation sub = size_ladder_substation();
  sub.bays.push_back(Bay{"DEAD", {make_asset("z", "earthing", 0)}});
  sub.bays.push_back(Bay{"WEIRD", {make_asset("q", "mystery", 5)}});
  const BiasReport r = bias_diagnostics(sub, Catalogs{}, StrategyConfig{});
  EXPECT_EQ(r.excluded, (std::vector<std::string>{"DEAD", "WEIRD"}));
  EXPECT_EQ(r.flagged.size(), 3u);
}

// ---- comparison ------------------------------------------------------------------------

TEST(CompareMethods, IdenticalMethodsCorrelatePerfectly) {
  const std::vector<MethodSpec> ms = {kFmeca, kFmeca};
  const auto r = compare_methods(size_ladder_substation(), ms, Catalogs{}, StrategyConfig{});
  const auto &s = r.substations.at(0);
  for (const auto &b : s.bays)
    EXPECT_EQ(*b.deltas.at(0), 0.0);
  EXPECT_EQ(*s.correlations.at(0).spearman, 1.0);
}

TEST(CompareMethods, RawFollowsSizeWhileFmecaIsFlat) {
  const std::vector<MethodSpec> ms = {kRaw, kFmeca};
  const auto r = compare_methods(size_ladder_substation(), ms, Catalogs{}, StrategyConfig{});
  const auto &bays = r.substations.at(0).bays;
  ASSERT_EQ(bays.size(), 10u);
  for (std::size_t i = 0; i < bays.size(); ++i) {
    EXPECT_NEAR(*bays[i].cells[1].score(), 8.0, 1e-9);
    if (i > 0) {
      EXPECT_GT(*bays[i].cells[0].score(), *bays[i - 1].cells[0].score());
    }
  }
  // FMECA is constant, raw is not: correlation undefined.
  EXPECT_FALSE(r.substations[0].correlations[0].spearman);
}

TEST(CompareMethods, SingleBayHasNoCorrelation) {
  Substation sub{"S", {Bay{"only", {make_asset("a", "earthing", 6)}}}};
  const std::vector<MethodSpec> ms = {kNorm, kFmeca};
  const auto r = compare_methods(sub, ms, Catalogs{}, StrategyConfig{});
  EXPECT_EQ(r.substations[0].bays.size(), 1u);
  EXPECT_EQ(r.substations[0].bays[0].cells.size(), 2u);
  EXPECT_FALSE(r.substations[0].correlations[0].spearman);
}

TEST(CompareMethods, ErrorsStayInTheirCell) {
  Substation sub = two_bay_substation();
  sub.bays.push_back(Bay{"B3", {make_asset("p", "protection_device", 5)}});  // no year
  const std::vector<MethodSpec> ms = {kNorm, kFmeca};
  const auto r = compare_methods(sub, ms, Catalogs{}, StrategyConfig{});
  const auto &b3 = r.substations[0].bays[2];
  EXPECT_EQ(b3.bay_id, "B3");
  EXPECT_TRUE(b3.cells[0].score());
  ASSERT_TRUE(b3.cells[1].error);
  EXPECT_NE(b3.cells[1].error->find("MissingBuildYear"), std::string::npos);
  EXPECT_TRUE(r.substations[0].rollups[0].result);
  EXPECT_TRUE(r.substations[0].rollups[1].error);
}

TEST(CompareMethods, BandFractionsSumToOne) {
  FleetSpec spec;
  spec.invalid_fraction = 0.1;
  const std::vector<MethodSpec> ms = {kNorm, kFmeca};
  const auto r = compare_methods(generate_fleet(spec), ms, Catalogs{}, StrategyConfig{});
  for (const auto &s : r.substations) {
    double sum = 0;
    for (double f : s.band_fractions)
      sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(CompareMethods, ScoresEqualAggregationOutputs) {
  const Substation sub = two_bay_substation();
  const std::vector<MethodSpec> ms = {kFmeca};
  const auto r = compare_methods(sub, ms, Catalogs{}, StrategyConfig{});
  const auto direct = aggregate_substation(sub, Catalogs{}, StrategyConfig{});
  for (std::size_t i = 0; i < direct.bays.size(); ++i)
    EXPECT_EQ(r.substations[0].bays[i].cells[0].score(), direct.bays[i].score);
  EXPECT_EQ(r.substations[0].rollups[0].score(), direct.rollup.score);
}

TEST(CompareMethods, RequiresAMethod) {
  EXPECT_THROW(compare_methods(two_bay_substation(), {}, Catalogs{}, StrategyConfig{}), Error);
}

// ---- emission ----------------------------------------------------------------------

TEST(EmitReport, JsonIsDeterministicAndSorted) {
  const std::vector<MethodSpec> ms = {kNorm, kFmeca};
  const auto r = compare_methods(two_bay_substation(), ms, Catalogs{}, StrategyConfig{});
  const std::string a = emit_report(r, ReportFormat::Json);
  EXPECT_EQ(a, emit_report(r, ReportFormat::Json));
  const auto doc = nlohmann::json::parse(a);
  EXPECT_EQ(doc["schema"], "hiagg.comparison/1");
  EXPECT_EQ(doc["substations"][0]["bays"][0]["bay_id"], "B1");
  // Key order in the text is alphabetical.
  EXPECT_LT(a.find("\"config\""), a.find("\"fleet_audit\""));
  EXPECT_LT(a.find("\"fleet_audit\""), a.find("\"methods\""));
  // Scores carry exactly four decimals.
  EXPECT_TRUE(std::regex_search(a, std::regex("\"score\": 6\\.0000")));
}

TEST(EmitReport, CsvCardinality) {
  const std::vector<MethodSpec> ms = {kNorm, kFmeca};
  const auto r = compare_methods(two_bay_substation(), ms, Catalogs{}, StrategyConfig{});
  const std::string csv = emit_report(r, ReportFormat::Csv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kReportCsvHeader);
}

TEST(EmitReport, ReportRoundTripsThroughJson) {
  const std::vector<MethodSpec> ms = {kRaw, kFmeca, MethodSpec{Method::FailureInterpretation}};
  Substation sub = size_ladder_substation();
  sub.bays.push_back(Bay{"DEAD", {make_asset("z", "earthing", 0)}});
  const auto r = compare_methods(sub, ms, Catalogs{}, StrategyConfig{});
  const auto back = report_from_json(nlohmann::json::parse(emit_report(r, ReportFormat::Json)), "r");
  ASSERT_EQ(back.methods, r.methods);
  ASSERT_EQ(back.substations.size(), 1u);
  for (std::size_t b = 0; b < r.substations[0].bays.size(); ++b)
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const auto x = r.substations[0].bays[b].cells[m].score();
      const auto y = back.substations[0].bays[b].cells[m].score();
      ASSERT_EQ(x.has_value(), y.has_value());
      if (x) {
        EXPECT_NEAR(*x, *y, 5e-5);
      }
    }
  EXPECT_EQ(emit_chart(back), emit_chart(r));
}

TEST(WriteText, UnwritableOutput) {
  try {
    write_text("/nonexistent/dir/out.json", "x");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnwritableOutput);
  }
}

// ---- chart --------------------------------------------------------------------------

namespace {

struct ParsedBar {
  std::string bay, method;
  std::optional<double> score;
  double height;
  bool placeholder;
};

std::vector<ParsedBar> parse_bars(const std::string &svg) {
  std::vector<ParsedBar> out;
  const std::regex rect(R"re(<rect class="bar([^"]*)" data-bay="([^"]*)" data-method="([^"]*)"(?: data-score="([^"]*)")? x="[^"]*" y="[^"]*" width="[^"]*" height="([^"]*)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rect); it != std::sregex_iterator(); ++it) {
    const auto &m = *it;
    ParsedBar b;
    b.placeholder = m[1].str().find("placeholder") != std::string::npos;
    b.bay = m[2];
    b.method = m[3];
    if (m[4].matched)
      b.score = std::stod(m[4]);
    b.height = std::stod(m[5]);
    out.push_back(b);
  }
  return out;
}

}  // namespace

TEST(EmitChart, BarsPerBayAndMethod) {
  Substation sub = two_bay_substation();
  sub.bays.push_back(Bay{"B3", {make_asset("x", "earthing", 9)}});
  const std::vector<MethodSpec> ms = {kNorm, kFmeca};
  const auto r = compare_methods(sub, ms, Catalogs{}, StrategyConfig{});
  const std::string svg = emit_chart(r);
  const auto bars = parse_bars(svg);
  EXPECT_EQ(bars.size(), 6u);
  std::size_t clusters = 0;
  for (auto p = svg.find("class=\"cluster\""); p != std::string::npos; p = svg.find("class=\"cluster\"", p + 1))
    ++clusters;
  EXPECT_EQ(clusters, 3u);
  EXPECT_EQ(svg, emit_chart(r));
  EXPECT_NE(svg.find("class=\"donut-segment\""), std::string::npos);
}

TEST(EmitChart, BarHeightsMatchScores) {
  const std::vector<MethodSpec> ms = {kNorm, kFmeca, MethodSpec{Method::FailureInterpretation}};
  FleetSpec spec;
  spec.n_substations = 2;
  const auto r = compare_methods(generate_fleet(spec), ms, Catalogs{}, StrategyConfig{});
  const auto bars = parse_bars(emit_chart(r));
  ASSERT_FALSE(bars.empty());
  std::size_t k = 0;
  for (const auto &s : r.substations)
    for (const auto &b : s.bays)
      for (std::size_t m = 0; m < ms.size(); ++m, ++k) {
        const auto score = b.cells[m].score();
        ASSERT_LT(k, bars.size());
        EXPECT_EQ(bars[k].bay, b.bay_id);
        if (!score) {
          EXPECT_TRUE(bars[k].placeholder);
          continue;
        }
        EXPECT_NEAR(bars[k].height / chart::kPixelsPerPoint, *score, 0.01 / chart::kPixelsPerPoint + 5e-5);
        EXPECT_NEAR(*bars[k].score, *score, 5e-5);
      }
  EXPECT_EQ(k, bars.size());
}

TEST(EmitChart, IndeterminateBayIsHatched) {
  Substation sub = two_bay_substation();
  sub.bays.push_back(Bay{"B9", {make_asset("z", "earthing", 0)}});
  const std::vector<MethodSpec> ms = {kFmeca};
  const std::string svg = emit_chart(compare_methods(sub, ms, Catalogs{}, StrategyConfig{}));
  const auto bars = parse_bars(svg);
  ASSERT_EQ(bars.size(), 3u);
  EXPECT_TRUE(bars[2].placeholder);
  EXPECT_NE(svg.find("fill=\"url(#hatch)\""), std::string::npos);
  EXPECT_NE(svg.find(">n/a</text>"), std::string::npos);
}
