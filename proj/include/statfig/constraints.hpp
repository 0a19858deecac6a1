#pragma once

#include <map>
#include <string>
#include <vector>

#include "statfig/chart_ir.hpp"
#include "statfig/layout.hpp"
#include "statfig/metadata.hpp"
#include "statfig/svg_render.hpp"

namespace statfig {

struct ConstraintCheck {
  std::string id;
  bool pass = false;
  std::string detail;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;
  bool passed = false;

  int passing_count() const {
    int n = 0;
    for (const auto& c : checks) n += c.pass ? 1 : 0;
    return n;
  }

  const ConstraintCheck* find(const std::string& id) const {
    for (const auto& c : checks) {
      if (c.id == id) return &c;
    }
    return nullptr;
  }
};

/// The fixed check-id set, mirroring the judge checklist.
inline const std::vector<std::string>& constraint_check_ids() {
  static const std::vector<std::string> ids = {
      "SubchartCount",  "SubchartType", "AxesAndStats",
      "SubchartPosition", "AlignmentAndLayout", "TitleAndSummary",
      "SpacingBound",   "NoOverlaps",   "NoExtraAxes",
  };
  return ids;
}

namespace detail_checks {

inline bool multiset_contains(std::vector<double> haystack, const std::vector<double>& needles,
                              double tol = 1e-9) {
  std::vector<bool> used(haystack.size(), false);
  for (double v : needles) {
    bool found = false;
    for (size_t i = 0; i < haystack.size(); ++i) {
      if (!used[i] && std::abs(haystack[i] - v) <= tol) {
        used[i] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace detail_checks

namespace detail_checks {

/// Full checklist evaluation. When `figure` is null (the program failed to
/// lay out), the geometry-dependent checks fail with the layout error.
inline ConstraintReport run_checks(const ChartIR& ir, const MetadataDoc& doc,
                                   const LayoutedFigure* figure,
                                   const std::string& layout_error) {
  ConstraintReport report;
  auto add = [&](std::string id, bool pass, std::string detail) {
    report.checks.push_back({std::move(id), pass, std::move(detail)});
  };

  // SubchartCount
  {
    size_t expected = doc.subcharts.size();
    size_t found = ir.panels.size();
    add("SubchartCount", expected == found,
        "expected " + std::to_string(expected) + ", found " + std::to_string(found));
  }

  // SubchartType: kinds match per index
  {
    bool pass = true;
    std::string detail = "all panel kinds match";
    size_t limit = std::min(ir.panels.size(), doc.subcharts.size());
    for (size_t i = 0; i < limit; ++i) {
      if (ir.panels[i].kind != doc.subcharts[i].kind) {
        pass = false;
        detail = "panel " + std::to_string(i + 1) + ": expected " +
                 kind_name(doc.subcharts[i].kind) + ", found " + kind_name(ir.panels[i].kind);
        break;
      }
    }
    if (ir.panels.size() != doc.subcharts.size()) pass = false;
    add("SubchartType", pass, detail);
  }

  // AxesAndStats: every gold numeric value appears in some panel series
  {
    std::vector<double> panel_values;
    for (const auto& p : ir.panels) {
      for (const auto& s : p.series) {
        for (const auto& pt : s.points) panel_values.push_back(pt.value);
      }
    }
    std::vector<double> gold = extract_numbers(doc);
    bool pass = detail_checks::multiset_contains(panel_values, gold);
    add("AxesAndStats", pass,
        pass ? "all " + std::to_string(gold.size()) + " gold values present"
             : "panel series are missing gold values");
  }

  // SubchartPosition: arrangement consistent with the placement phrases
  {
    Arrangement derived = derive_arrangement(doc);
    bool pass = ir.arrangement.mode == derived.mode;
    auto mode_name = [](ArrangementMode m) {
      switch (m) {
        case ArrangementMode::column: return "column";
        case ArrangementMode::row: return "row";
        case ArrangementMode::grid: return "grid";
      }
      return "column";
    };
    add("SubchartPosition", pass,
        std::string("placements imply ") + mode_name(derived.mode) + ", program uses " +
            mode_name(ir.arrangement.mode));
  }

  // AlignmentAndLayout: boxes pairwise disjoint and inside the canvas
  if (figure == nullptr) {
    add("AlignmentAndLayout", false, layout_error);
  } else {
    bool pass = true;
    std::string detail = "panel boxes disjoint and inside canvas";
    for (size_t i = 0; i < figure->panels.size() && pass; ++i) {
      const Box& cell = figure->panels[i].cell;
      if (!figure->canvas.contains(cell)) {
        pass = false;
        detail = "panel " + std::to_string(i + 1) + " escapes the canvas";
      }
      for (size_t j = i + 1; j < figure->panels.size() && pass; ++j) {
        if (cell.intersects(figure->panels[j].cell)) {
          pass = false;
          detail = "panels " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                   " overlap";
        }
      }
    }
    add("AlignmentAndLayout", pass, detail);
  }

  // TitleAndSummary: document title/summary carried into the program
  {
    bool title_ok = doc.title.empty() || ir.figure_title == doc.title;
    bool summary_ok = doc.summary.empty() || ir.figure_summary == doc.summary;
    add("TitleAndSummary", title_ok && summary_ok,
        title_ok && summary_ok ? "title and summary present"
                               : (!title_ok ? "figure title differs from metadata"
                                            : "figure summary differs from metadata"));
  }

  // SpacingBound: normalized vertical spacing < 1/(rows-1) when rows >= 2
  if (figure == nullptr) {
    add("SpacingBound", false, layout_error);
  } else {
    bool pass = true;
    std::string detail = "single row";
    if (figure->rows >= 2) {
      double bound = 1.0 / (figure->rows - 1);
      pass = figure->spacing_norm < bound;
      detail = "spacing " + format_number(figure->spacing_norm) + " vs bound " +
               format_number(bound);
    }
    add("SpacingBound", pass, detail);
  }

  // NoOverlaps / NoExtraAxes need the rendered output
  if (figure == nullptr) {
    add("NoOverlaps", false, layout_error);
    add("NoExtraAxes", false, layout_error);
  } else {
    std::string svg = render_svg(*figure, ir);
    auto violations = detect_overlaps(*figure, svg);
    add("NoOverlaps", violations.empty(),
        violations.empty()
            ? "no text collisions"
            : std::to_string(violations.size()) + " collision(s), first: " +
                  violations[0].first + " vs " + violations[0].second);

    std::map<int, int> axis_count;
    for (const auto& a : figure->axes) axis_count[a.panel]++;
    bool pass = true;
    std::string detail = "one axis pair per cartesian panel";
    for (size_t i = 0; i < ir.panels.size(); ++i) {
      int want = is_cartesian(ir.panels[i].kind) ? 2 : 0;
      int got = axis_count.count(static_cast<int>(i)) ? axis_count[static_cast<int>(i)] : 0;
      if (got != want) {
        pass = false;
        detail = "panel " + std::to_string(i + 1) + " has " + std::to_string(got) +
                 " axis elements, expected " + std::to_string(want);
        break;
      }
    }
    add("NoExtraAxes", pass, detail);
  }

  report.passed = true;
  for (const auto& c : report.checks) report.passed = report.passed && c.pass;
  return report;
}

}  // namespace detail_checks

/// Runs the mechanical subset of the judge checklist against a chart program
/// and its layout. Renders internally so overlap and axis checks look at the
/// actual output geometry.
inline ConstraintReport check_constraints(const ChartIR& ir, const MetadataDoc& doc,
                                          const LayoutedFigure& figure) {
  return detail_checks::run_checks(ir, doc, &figure, "");
}

/// Checklist evaluation for a program that failed to lay out; the geometry
/// checks fail with the layout error.
inline ConstraintReport check_constraints_unlayouted(const ChartIR& ir,
                                                     const MetadataDoc& doc,
                                                     const std::string& layout_error) {
  return detail_checks::run_checks(ir, doc, nullptr, layout_error);
}

inline json constraint_report_to_json(const ConstraintReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"id", c.id}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return json{{"passed", r.passed}, {"checks", checks}};
}

}  // namespace statfig
