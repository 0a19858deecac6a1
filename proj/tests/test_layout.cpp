#include <catch2/catch_amalgamated.hpp>

#include "statfig/layout.hpp"
#include "support/test_support.hpp"

using namespace statfig;
using test_support::load_fixture_doc;

namespace {

// brute-force pairwise disjointness of panel cells
void require_disjoint_and_contained(const LayoutedFigure& fig) {
  for (size_t i = 0; i < fig.panels.size(); ++i) {
    const Box& a = fig.panels[i].cell;
    INFO("panel " << i + 1);
    REQUIRE(fig.canvas.contains(a));
    for (size_t j = i + 1; j < fig.panels.size(); ++j) {
      REQUIRE_FALSE(a.intersects(fig.panels[j].cell));
    }
  }
}

MetadataDoc column_doc(int n, int panel_w = 420, int panel_h = 160) {
  MetadataDoc doc;
  doc.title = "suite";
  doc.summary = "generated";
  for (int i = 0; i < n; ++i) {
    Subchart sc;
    sc.kind_raw = "bar chart";
    sc.kind = ChartKind::bar;
    sc.stats = parse_stats("alpha: 35%, beta: 63%");
    sc.axis = parse_axis("The X-axis represents item, and the Y-axis represents share");
    sc.text = "panel " + std::to_string(i + 1);
    sc.position_chart =
        i == 0 ? "the first one in the image" : "positioned below the previous subchart";
    sc.dimensions = parse_dimensions(std::to_string(panel_w) + "px width and " +
                                     std::to_string(panel_h) + "px height");
    sc.alignment = Alignment::vertical;
    doc.subcharts.push_back(std::move(sc));
  }
  return doc;
}

}  // namespace

TEST_CASE("three stacked panels get disjoint boxes with headings above") {
  ChartIR ir = compile_metadata(load_fixture_doc("example1.json"));
  ir.canvas.width_px = 510 + 48;
  ir.canvas.height_px = 900;
  LayoutedFigure fig = layout(ir);
  REQUIRE(fig.panels.size() == 3);
  require_disjoint_and_contained(fig);
  for (const auto& p : fig.panels) {
    // heading box sits directly above the plot box
    REQUIRE(p.heading.bottom() == Catch::Approx(p.plot.y));
    REQUIRE(p.heading.x == Catch::Approx(p.plot.x));
  }
}

TEST_CASE("single panel occupies the canvas minus margins") {
  MetadataDoc doc = column_doc(1);
  doc.title = "";
  doc.subcharts[0].text = "";
  doc.subcharts[0].dimensions = Dimensions{};
  ChartIR ir = compile_metadata(doc);
  LayoutedFigure fig = layout(ir);
  REQUIRE(fig.panels.size() == 1);
  const Box& cell = fig.panels[0].cell;
  REQUIRE(cell.x == Catch::Approx(layoutc::kMargin));
  REQUIRE(cell.y == Catch::Approx(layoutc::kMargin));
  REQUIRE(cell.w == Catch::Approx(fig.canvas.w - 2 * layoutc::kMargin));
}

TEST_CASE("21 panels on a tiny canvas are infeasible even at the growth cap") {
  MetadataDoc doc = column_doc(21);
  ChartIR ir = compile_metadata(doc);
  ir.canvas.width_px = 100;
  ir.canvas.height_px = 100;
  REQUIRE_THROWS_AS(layout(ir), InfeasibleLayout);
}

TEST_CASE("canvas height grows to fit requested panel boxes") {
  MetadataDoc doc = column_doc(4, 400, 300);
  ChartIR ir = compile_metadata(doc);
  ir.canvas.height_px = 500;  // far less than 4 x 300
  LayoutedFigure fig = layout(ir);
  REQUIRE(fig.canvas.h > 500);
  REQUIRE(fig.canvas.h <= 4 * 500);
  require_disjoint_and_contained(fig);
}

TEST_CASE("spacing bound holds across generated 1..21 panel column figures") {
  for (int n = 1; n <= 21; ++n) {
    INFO(n << " panels");
    ChartIR ir = compile_metadata(column_doc(n));
    LayoutedFigure fig = layout(ir);
    require_disjoint_and_contained(fig);
    if (fig.rows >= 2) {
      REQUIRE(fig.spacing_norm < 1.0 / (fig.rows - 1));
      REQUIRE(fig.spacing_v > 0);
    }
  }
}

TEST_CASE("squeezed layouts still respect the spacing bound") {
  MetadataDoc doc = column_doc(12, 420, 400);
  ChartIR ir = compile_metadata(doc);
  ir.canvas.height_px = 1400;  // forces the 4x cap and row squeezing
  LayoutedFigure fig = layout(ir);
  REQUIRE(fig.canvas.h == Catch::Approx(4 * 1400));
  require_disjoint_and_contained(fig);
  REQUIRE(fig.spacing_norm < 1.0 / (fig.rows - 1));
}

TEST_CASE("narrow canvases are rejected") {
  ChartIR ir = compile_metadata(column_doc(2));
  ir.canvas.width_px = 60;  // below the minimum cell width
  REQUIRE_THROWS_AS(layout(ir), InfeasibleLayout);
}

TEST_CASE("structural panel validation rejects bad shapes") {
  SECTION("pie with negative values") {
    ChartIR ir = compile_metadata(load_fixture_doc("pie.json"));
    ir.panels[0].series[0].points[0].value = -5;
    REQUIRE_THROWS(layout(ir));
  }
  SECTION("stacked with a single series") {
    ChartIR ir = compile_metadata(load_fixture_doc("stacked_grouped.json"));
    ir.panels[0].series.resize(1);
    REQUIRE_THROWS(layout(ir));
  }
  SECTION("line with one point") {
    ChartIR ir = compile_metadata(load_fixture_doc("line_area.json"));
    ir.panels[0].series[0].points.resize(1);
    REQUIRE_THROWS(layout(ir));
  }
}

TEST_CASE("every placed element stays inside the canvas") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i) {
    MetadataDoc doc = test_support::random_valid_doc(rng);
    ChartIR ir = compile_metadata(doc);
    LayoutedFigure fig = layout(ir);
    for (const auto& t : fig.texts) {
      INFO("text \"" << t.content << "\"");
      REQUIRE(fig.canvas.contains(t.box, 0.5));
    }
    for (const auto& m : fig.marks) {
      REQUIRE(fig.canvas.contains(m.box, 0.5));
    }
  }
}

TEST_CASE("shrunk canvases stay overlap-free or fail infeasible") {
  std::mt19937_64 rng(555);
  for (int i = 0; i < 60; ++i) {
    MetadataDoc doc = test_support::random_valid_doc(rng);
    ChartIR ir = compile_metadata(doc);
    for (double factor : {0.5, 0.2}) {
      ChartIR shrunk = ir;
      shrunk.canvas.height_px =
          std::max(40, static_cast<int>(ir.canvas.height_px * factor));
      try {
        LayoutedFigure fig = layout(shrunk);
        require_disjoint_and_contained(fig);
        if (fig.rows >= 2) REQUIRE(fig.spacing_norm < 1.0 / (fig.rows - 1));
      } catch (const InfeasibleLayout&) {
        // acceptable outcome for a canvas this small
      }
    }
  }
}

TEST_CASE("layout is deterministic") {
  ChartIR ir = compile_metadata(load_fixture_doc("example2.json"));
  LayoutedFigure a = layout(ir);
  LayoutedFigure b = layout(ir);
  REQUIRE(a.texts.size() == b.texts.size());
  for (size_t i = 0; i < a.texts.size(); ++i) {
    REQUIRE(a.texts[i].box.x == b.texts[i].box.x);
    REQUIRE(a.texts[i].content == b.texts[i].content);
  }
  REQUIRE(a.spacing_v == b.spacing_v);
}
