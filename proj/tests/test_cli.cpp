#include <gtest/gtest.h>

#include "cli_harness.hpp"

using namespace hiagg::testing;

namespace {

const std::string kHeader(hiagg::kFleetHeader);

const std::string kFixtureBay = kHeader + "\n"
                                "CB1,S1,BAY1,circuit_breaker,primary,1995,8,350000,true\n"
                                "DS1,S1,BAY1,disconnector,primary,1995,6,45000,false\n"
                                "IT1,S1,BAY1,instrument_transformer,primary,1995,4,60000,false\n";

}  // namespace

TEST(Cli, SynthThenValidateCleanFleet) {
  ScratchDir dir("clean");
  const auto fleet = dir.file("fleet.csv");
  auto r = run_cli({"synth", "--seed", "3", "--out", fleet});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"validate", "--in", fleet});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["totals"]["n_invalid"], 0);
  EXPECT_EQ(doc["exceeds_threshold"], false);
}

TEST(Cli, ValidateExitsTwoOverThreshold) {
  ScratchDir dir("dirty");
  const auto spec = dir.write("spec.json", R"({"invalid_fraction": 0.182, "target_assets": 1000})");
  const auto fleet = dir.file("fleet.csv");
  ASSERT_EQ(run_cli({"synth", "--spec", spec, "--out", fleet}).code, 0);
  EXPECT_EQ(run_cli({"validate", "--in", fleet, "--invalid-threshold", "0.15"}).code, 2);
  EXPECT_EQ(run_cli({"validate", "--in", fleet, "--invalid-threshold", "0.5"}).code, 0);
  const auto csv = run_cli({"validate", "--in", fleet, "--format", "csv", "--invalid-threshold", "0.5"});
  EXPECT_NE(csv.out.find("*,*,1000,182,0.1820"), std::string::npos) << csv.out;
}

TEST(Cli, AggregateFmecaFixture) {
  ScratchDir dir("agg");
  const auto fleet = dir.write("fleet.csv", kFixtureBay);
  auto r = run_cli({"aggregate", "--method", "fmeca", "--in", fleet});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"score\": 6.1508"), std::string::npos);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["methods"].size(), 1u);
  EXPECT_EQ(run_cli({"aggregate", "--methods", "fmeca,weighted_avg", "--in", fleet}).code, 3);
  EXPECT_EQ(run_cli({"aggregate", "--in", fleet}).code, 3);
}

TEST(Cli, CompareWritesReportAndChart) {
  ScratchDir dir("cmp");
  const auto fleet = dir.file("fleet.csv");
  ASSERT_EQ(run_cli({"synth", "--seed", "11", "--out", fleet}).code, 0);
  const auto report = dir.file("report.json");
  const auto chart = dir.file("chart.svg");
  auto r = run_cli({"compare", "--methods", "weighted_avg,fmeca", "--in", fleet, "--out", report,
                    "--chart", chart});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(slurp(report));
  EXPECT_EQ(doc["methods"], nlohmann::json({"weighted_avg_normalized", "fmeca"}));
  for (const auto &s : doc["substations"])
    for (const auto &b : s["bays"]) {
      EXPECT_TRUE(b["scores"].contains("fmeca"));
      EXPECT_TRUE(b["scores"].contains("weighted_avg_normalized"));
    }

  const auto chart2 = dir.file("chart2.svg");
  ASSERT_EQ(run_cli({"chart", "--in", report, "--out", chart2}).code, 0);
  EXPECT_EQ(slurp(chart), slurp(chart2));
}

TEST(Cli, NormalizationFlagSelectsRaw) {
  ScratchDir dir("raw");
  const auto fleet = dir.write("fleet.csv", kFixtureBay);
  auto r = run_cli({"compare", "--methods", "weighted_avg", "--normalization", "raw", "--in", fleet,
                    "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  // 8*8 + 6*8 + 4*8 = 144
  EXPECT_NE(r.out.find("S1,BAY1,weighted_avg_raw,144.0000,green"), std::string::npos) << r.out;
}

TEST(Cli, HardDataErrorsExitOneWithLine) {
  ScratchDir dir("bad");
  const auto fleet = dir.write("fleet.csv", kHeader + "\nX,S,B,earthing,tertiary,,5,,false\n"
                                                      "Y,S,B,earthing,tertiary,,11,,false\n");
  auto r = run_cli({"validate", "--in", fleet});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(fleet + ":3: HiOutOfRange"), std::string::npos) << r.err;

  const auto unknown = dir.write("u.csv", kHeader + "\nX,S,B,mystery,tertiary,,5,,false\n");
  r = run_cli({"compare", "--in", unknown, "--methods", "fmeca"});
  EXPECT_EQ(r.code, 0);  // per-bay errors live in the report
  EXPECT_NE(r.out.find("UnknownAssetType"), std::string::npos);

  r = run_cli({"compare", "--in", fleet + ".missing"});
  EXPECT_EQ(r.code, 1);
  const auto good = dir.write("g.csv", kFixtureBay);
  r = run_cli({"compare", "--in", good, "--out", "/nonexistent/x/report.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("UnwritableOutput"), std::string::npos);

  const auto catalog = dir.write("c.json", R"({"weights": {"earthing": {"class": "primary", "weight": 2}}})");
  r = run_cli({"compare", "--in", good, "--catalog", catalog});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("WeightOutOfClassRange"), std::string::npos);
}

TEST(Cli, UsageErrorsExitThree) {
  EXPECT_EQ(run_cli({}).code, 3);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 3);
  ScratchDir dir("usage");
  const auto fleet = dir.write("fleet.csv", kFixtureBay);
  EXPECT_EQ(run_cli({"compare", "--in", fleet, "--methods", "vibes"}).code, 3);
  EXPECT_EQ(run_cli({"compare", "--in", fleet, "--power-exponent", "0"}).code, 3);
  EXPECT_EQ(run_cli({"compare", "--in", fleet, "--normalization", "sideways"}).code, 3);
  EXPECT_EQ(run_cli({"compare", "--in", fleet, "--invalid-threshold", "2"}).code, 3);
  EXPECT_EQ(run_cli({"compare", "--in", fleet, "--cap-offset", "-1"}).code, 3);
  EXPECT_EQ(run_cli({"compare"}).code, 3);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, SynthIsByteStable) {
  EXPECT_EQ(run_cli({"synth", "--seed", "5"}).out, run_cli({"synth", "--seed", "5"}).out);
  EXPECT_NE(run_cli({"synth", "--seed", "5"}).out, run_cli({"synth", "--seed", "6"}).out);
}
