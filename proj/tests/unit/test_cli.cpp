#include <gtest/gtest.h>

#include "fepi/error.hpp"
#include "runner.hpp"

using namespace fepi::cli;

namespace {

SchemaError schema_error(const std::string& text) {
  try {
    run_text(text);
  } catch (const SchemaError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a schema error";
  return SchemaError("", "");
}

}  // namespace

TEST(Cli, ExitCodesFollowVerdicts) {
  EXPECT_EQ(exit_code(fepi::Verdict::holds), 0);
  EXPECT_EQ(exit_code(fepi::Verdict::violated), 2);
  EXPECT_EQ(exit_code(fepi::Verdict::inconclusive), 3);
}

TEST(Cli, CommandList) {
  const auto& names = command_names();
  for (const char* c : {"entropy", "freeconv", "epi", "minkowski", "theorem12", "corollary15", "lemma13", "bll",
                        "microstates-spectrum", "microstates-theta", "microstates-volume", "microstates-sum", "stam"})
    EXPECT_NE(std::find(names.begin(), names.end(), c), names.end()) << c;
}

TEST(Cli, EpiSemicircleExample) {
  const auto out = run_text(R"({"command": "epi", "params": {"alpha": {"family": "semicircle", "params": [1]},
                                                         "beta": {"family": "semicircle", "params": [1]}}})");
  EXPECT_EQ(out.exit_code, 0);
  const auto& r = out.document.at("result");
  EXPECT_NEAR(r.at("deficit").get<double>() / r.at("power_sum").get<double>(), 0.0, 2e-2);
  // Resolved defaults are echoed.
  EXPECT_EQ(out.document.at("config").at("params").at("grid").at("cells").get<int>(), 2048);
  EXPECT_EQ(out.document.at("verdict"), "holds");
}

TEST(Cli, BallExampleExactEquality) {
  const auto out = run_text(R"({"command": "minkowski", "params": {"n": 4, "rho": 0.7, "mc": false}})");
  EXPECT_EQ(out.exit_code, 0);
  EXPECT_NEAR(out.document.at("result").at("exact").at("equality_gap").get<double>(), 0.0, 1e-12);
}

TEST(Cli, BallExamplePipeline) {
  const auto out = run_text(R"({"command": "minkowski", "seed": 1, "params": {"n": 3, "rho": 0.5, "samples": 100000}})");
  EXPECT_EQ(out.exit_code, 0);
  const auto& c = out.document.at("config").at("params").at("constants");
  EXPECT_EQ(c.at("c").get<double>(), 0.01);
  EXPECT_EQ(c.at("C").get<double>(), 3.0);
}

TEST(Cli, PointMassEntropyIsDivergentSentinel) {
  const auto out = run_text(R"({"command": "entropy", "params": {"mu": {"point_mass": 0}}})");
  EXPECT_EQ(out.exit_code, 0);
  EXPECT_TRUE(out.document.at("result").at("chi").at("divergent").get<bool>());
  EXPECT_TRUE(out.document.at("result").at("chi").at("value").is_null());
}

TEST(Cli, UnknownParameterHasPointerAndLine) {
  const auto e = schema_error("{\n  \"command\": \"lemma13\",\n  \"params\": {\n    \"n\": 4,\n    \"rho\": 0.2,\n    \"grid\": 3\n  }\n}");
  EXPECT_EQ(e.pointer(), "/params/grid");
  EXPECT_EQ(e.line(), 6);
}

TEST(Cli, WrongTypeIsSchemaError) {
  const auto e = schema_error("{\"command\": \"lemma13\",\n\"params\": {\"n\": \"four\", \"rho\": 0.2}}");
  EXPECT_EQ(e.pointer(), "/params/n");
  EXPECT_EQ(e.line(), 2);
}

TEST(Cli, NestedSpecErrorKeepsPointer) {
  const auto e = schema_error(R"({"command": "entropy", "params": {"mu": {"family": "semicircle", "params": [-1]}}})");
  EXPECT_EQ(e.pointer(), "/params/mu");
}

TEST(Cli, StochasticCommandsNeedSeed) {
  const auto e = schema_error(R"({"command": "bll", "params": {"A": {"kind": "ball", "radius": 1},
    "B": {"kind": "ball", "radius": 1}, "C": {"kind": "ball", "radius": 1}}})");
  EXPECT_EQ(e.pointer(), "/seed");
}

TEST(Cli, InvalidJsonReportsLine) {
  const auto e = schema_error("{\n\"command\": \"entropy\",\n\"params\": {\n}}}");
  EXPECT_EQ(e.line(), 4);
}

TEST(Cli, UnknownCommand) {
  EXPECT_EQ(schema_error(R"({"command": "nope"})").pointer(), "/command");
  EXPECT_EQ(schema_error(R"({"command": "entropy", "colour": 1})").pointer(), "/colour");
}

TEST(Cli, OutputIsByteReproducibleAndThreadFree) {
  const std::string cfg = R"({"command": "bll", "seed": 5, "params": {"samples": 20000,
    "A": {"kind": "ball", "radius": 1}, "B": {"kind": "box", "half_width": 0.5}, "C": {"kind": "ball", "radius": 1.2}}})";
  Overrides many;
  many.threads = 3;
  const auto a = run_text(cfg);
  const auto b = run_text(cfg, many);
  EXPECT_EQ(a.body, b.body);
  Overrides reseed;
  reseed.seed = 6;
  EXPECT_NE(run_text(cfg, reseed).body, a.body);
}

TEST(Cli, CsvSingleRun) {
  Overrides csv;
  csv.format = "csv";
  const auto out = run_text(R"({"command": "lemma13", "params": {"n": 4, "rho": 0.3, "grid_r0": 8}})", csv);
  EXPECT_EQ(out.format, "csv");
  const auto header_end = out.body.find("\r\n");
  ASSERT_NE(header_end, std::string::npos);
  EXPECT_NE(out.body.substr(0, header_end).find("result.c1_estimate"), std::string::npos);
  EXPECT_EQ(std::count(out.body.begin(), out.body.end(), '\n'), 2);
}

TEST(Cli, SweepRowsAreLexicographic) {
  const auto out = run_text(R"({"command": "lemma13", "params": {"grid_r0": 8},
    "sweep": {"params.rho": [0.2, 0.05], "params.n": [8, 2]}})");
  const auto& rows = out.document.at("rows");
  ASSERT_EQ(rows.size(), 4u);
  // Keys sorted: params.n before params.rho, last key fastest.
  EXPECT_EQ(rows[0].at("point").at("params.n"), 8);
  EXPECT_EQ(rows[0].at("point").at("params.rho"), 0.2);
  EXPECT_EQ(rows[1].at("point").at("params.rho"), 0.05);
  EXPECT_EQ(rows[2].at("point").at("params.n"), 2);
  for (const auto& r : rows) EXPECT_GT(r.at("document").at("result").at("c1_estimate").get<double>(), 0.0);
  EXPECT_EQ(out.format, "csv");
  EXPECT_EQ(std::count(out.body.begin(), out.body.end(), '\n'), 5);
}

TEST(Cli, OnePointSweepMatchesRun) {
  const auto single = run_text(R"({"command": "lemma13", "params": {"n": 8, "rho": 0.1, "grid_r0": 8}})");
  const auto sweep = run_text(R"({"command": "lemma13", "params": {"rho": 0.1, "grid_r0": 8}, "sweep": {"params.n": [8]}})");
  ASSERT_EQ(sweep.document.at("rows").size(), 1u);
  EXPECT_EQ(sweep.document.at("rows")[0].at("document"), single.document);
}

TEST(Cli, SweepRecordsFailuresAndContinues) {
  const auto out = run_text(R"({"command": "lemma13", "params": {"rho": 0.1, "grid_r0": 8},
    "sweep": {"params.n": [1, 4]}})");
  const auto& rows = out.document.at("rows");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("status"), "error");
  EXPECT_EQ(rows[1].at("status"), "ok");
  EXPECT_EQ(out.exit_code, 1);
}

TEST(Cli, SweepSizeLimit) {
  std::string big = R"({"command": "lemma13", "params": {}, "sweep": {"params.n": [)";
  for (int i = 0; i < 200; ++i) big += (i ? "," : "") + std::to_string(i + 2);
  big += R"(], "params.rho": [)";
  for (int i = 0; i < 60; ++i) big += (i ? "," : "") + std::to_string(0.01 * (i + 1));
  big += "]}}";
  EXPECT_EQ(schema_error(big).pointer(), "/sweep");
}

TEST(Cli, MicrostatesSumEmptyFilterIsInconclusive) {
  const auto out = run_text(R"({"command": "microstates-sum", "seed": 2,
    "params": {"h1": {"affine": [1, 0]}, "h2": {"affine": [1, 0]}, "k": 16, "trials": 100}})");
  if (out.document.at("result").at("empty_filter").get<bool>()) {
    EXPECT_EQ(out.exit_code, 3);
  } else {
    EXPECT_EQ(out.exit_code, 0);
  }
}
