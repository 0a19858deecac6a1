#include <catch2/catch_amalgamated.hpp>

#include "statfig/chart_ir.hpp"
#include "support/test_support.hpp"

using namespace statfig;
using test_support::load_fixture_doc;

TEST_CASE("three stacked bar subcharts compile to a column figure") {
  MetadataDoc doc = load_fixture_doc("example1.json");
  ChartIR ir = compile_metadata(doc);
  REQUIRE(ir.panels.size() == 3);
  REQUIRE(ir.arrangement.mode == ArrangementMode::column);
  REQUIRE(ir.arrangement.rows == 3);
  REQUIRE(ir.arrangement.cols == 1);
  for (const auto& p : ir.panels) REQUIRE(p.kind == ChartKind::bar);
  // series taken verbatim from the stat block
  REQUIRE(ir.panels[1].series.size() == 3);
  REQUIRE(ir.panels[1].series[0].points[0].value == 40.0);
  REQUIRE(ir.panels[0].requested_box.has_value());
  REQUIRE(ir.panels[0].requested_box->width_px == 510);
}

TEST_CASE("right-of placement compiles to a row figure") {
  MetadataDoc doc = load_fixture_doc("example2.json");
  ChartIR ir = compile_metadata(doc);
  REQUIRE(ir.panels.size() == 2);
  REQUIRE(ir.arrangement.mode == ArrangementMode::row);
  REQUIRE(ir.arrangement.cols == 2);
  REQUIRE(ir.panels[0].kind == ChartKind::horizontal_bar);
}

TEST_CASE("a single subchart is a one-row column") {
  MetadataDoc doc = load_fixture_doc("example3.json");
  ChartIR ir = compile_metadata(doc);
  REQUIRE(ir.panels.size() == 1);
  REQUIRE(ir.arrangement.mode == ArrangementMode::column);
}

TEST_CASE("mixed placement votes downgrade to a grid") {
  MetadataDoc doc = load_fixture_doc("grid.json");
  ChartIR ir = compile_metadata(doc);
  REQUIRE(ir.arrangement.mode == ArrangementMode::grid);
  REQUIRE(ir.arrangement.cols == 2);  // ceil(sqrt(3))
  REQUIRE(ir.arrangement.rows == 2);
  REQUIRE(ir.arrangement.rows * ir.arrangement.cols >= 3);
}

TEST_CASE("unknown kinds and empty series are compile errors") {
  MetadataDoc doc = load_fixture_doc("example1.json");
  SECTION("unknown kind") {
    doc.subcharts[0].kind_raw = "mystery";
    doc.subcharts[0].kind = ChartKind::unknown;
    REQUIRE_THROWS_AS(compile_metadata(doc), UnrenderableKind);
  }
  SECTION("empty series") {
    doc.subcharts[1].stats = parse_stats("words but no values");
    REQUIRE_THROWS_AS(compile_metadata(doc), EmptySeries);
  }
}

TEST_CASE("bar-family panels get value labels, line panels do not") {
  ChartIR bars = compile_metadata(load_fixture_doc("example1.json"));
  REQUIRE(bars.panels[0].show_value_labels);
  ChartIR lines = compile_metadata(load_fixture_doc("line_area.json"));
  REQUIRE_FALSE(lines.panels[0].show_value_labels);
  ChartIR pies = compile_metadata(load_fixture_doc("pie.json"));
  REQUIRE(pies.panels[0].show_value_labels);
}

TEST_CASE("chart program JSON round-trips exactly") {
  for (const char* name : {"example1.json", "example2.json", "pie.json", "grid.json",
                           "line_area.json", "stacked_grouped.json", "histogram.json"}) {
    INFO(name);
    ChartIR ir = compile_metadata(load_fixture_doc(name));
    ChartIR back = ir_from_json(ir_to_json(ir));
    REQUIRE(back == ir);
  }
}

TEST_CASE("malformed chart programs are rejected") {
  SECTION("no panels") {
    json j = {{"figure_title", ""}, {"figure_summary", ""}, {"arrangement", "column"},
              {"panels", json::array()}};
    REQUIRE_THROWS_AS(ir_from_json(j), MalformedDocument);
  }
  SECTION("grid too small for the panel count") {
    ChartIR ir = compile_metadata(load_fixture_doc("grid.json"));
    json j = ir_to_json(ir);
    j["grid_rows"] = 1;
    j["grid_cols"] = 1;
    REQUIRE_THROWS_AS(ir_from_json(j), MalformedDocument);
  }
  SECTION("unknown panel kind") {
    ChartIR ir = compile_metadata(load_fixture_doc("example1.json"));
    json j = ir_to_json(ir);
    j["panels"][0]["kind"] = "hologram";
    REQUIRE_THROWS_AS(ir_from_json(j), UnrenderableKind);
  }
}

TEST_CASE("default palette avoids greys and blacks") {
  for (const auto& color : default_palette()) {
    REQUIRE(color != "#000000");
    REQUIRE(color.size() == 7);
    // grey means equal r/g/b channels
    bool grey = color.substr(1, 2) == color.substr(3, 2) &&
                color.substr(3, 2) == color.substr(5, 2);
    REQUIRE_FALSE(grey);
  }
}

TEST_CASE("derived arrangement is stable for fuzzed documents") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    MetadataDoc doc = test_support::random_valid_doc(rng);
    Arrangement a = derive_arrangement(doc);
    Arrangement b = derive_arrangement(doc);
    REQUIRE(a == b);
    REQUIRE(a.rows * a.cols >= static_cast<int>(doc.subcharts.size()));
  }
}
