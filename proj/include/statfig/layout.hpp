#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "statfig/chart_ir.hpp"
#include "statfig/errors.hpp"

namespace statfig {

struct Box {
  double x = 0, y = 0, w = 0, h = 0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }

  bool contains(const Box& other, double eps = 1e-6) const {
    return other.x >= x - eps && other.y >= y - eps &&
           other.right() <= right() + eps && other.bottom() <= bottom() + eps;
  }

  /// Positive-area intersection; touching edges do not count.
  bool intersects(const Box& other, double eps = 1e-6) const {
    double ow = std::min(right(), other.right()) - std::max(x, other.x);
    double oh = std::min(bottom(), other.bottom()) - std::max(y, other.y);
    return ow > eps && oh > eps;
  }
};

/// Text metrics use a fixed monospace approximation:
/// width = 0.6 * font_size * character count.
inline constexpr double kCharWidthFactor = 0.6;

inline double text_width(double font_size, size_t chars) {
  return kCharWidthFactor * font_size * static_cast<double>(chars);
}

struct TextElement {
  Box box;
  std::string content;
  double font_size = 0;
  double tx = 0, ty = 0;       // svg anchor point (baseline)
  std::string anchor = "start";  // start | middle
  std::string cls;
  std::string color = "#222222";
  int panel = -1;      // -1 for figure-level text
  int owner_mark = -1; // mark id whose interior legitimately holds this text
};

struct MarkElement {
  Box box;
  std::string shape;  // rect | slice | polyline
  std::string fill;
  std::string data;  // path d= (slice) or points= (polyline)
  int panel = -1;
  int id = -1;
};

struct AxisElement {
  int panel = -1;
  char which = 'x';
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

struct DecorElement {
  Box box;
  std::string fill;
  std::string cls;
};

struct PanelBoxes {
  Box cell;
  Box heading;
  Box plot;
  Box legend;
};

struct LayoutedFigure {
  Box canvas;
  int rows = 1;
  int cols = 1;
  double spacing_v = 0;     // resolved vertical spacing in px
  double spacing_norm = 0;  // spacing_v / canvas height
  std::vector<PanelBoxes> panels;

  // Full display list; rendering serializes it, overlap detection checks it.
  std::vector<TextElement> texts;
  std::vector<MarkElement> marks;
  std::vector<AxisElement> axes;
  std::vector<DecorElement> decor;
};

namespace layoutc {
inline constexpr double kMargin = 24;
inline constexpr double kTitleBand = 34;
inline constexpr double kHorizontalGap = 16;
inline constexpr double kMinCellWidth = 40;
inline constexpr double kMinPlotHeight = 24;
inline constexpr double kHeadingHeight = 20;
inline constexpr double kLegendHeight = 16;
inline constexpr double kGutterBottom = 18;
inline constexpr double kGutterTop = 4;
inline constexpr double kGutterRight = 4;
inline constexpr double kGrowthCap = 4.0;
inline constexpr double kValueScale = 0.92;  // fraction of chart height vmax maps to
}  // namespace layoutc

/// Structural panel checks: pie series non-negative, stacked/grouped need at
/// least two series, line-family needs two points per series.
inline void validate_ir(const ChartIR& ir) {
  if (ir.panels.empty()) throw MalformedDocument("chart program has no panels");
  const int n = static_cast<int>(ir.panels.size());
  if (ir.arrangement.rows * ir.arrangement.cols < n) {
    throw MalformedDocument("grid capacity smaller than panel count");
  }
  for (size_t i = 0; i < ir.panels.size(); ++i) {
    const PanelSpec& p = ir.panels[i];
    const std::string tag = "panel " + std::to_string(i + 1);
    size_t points = 0;
    for (const auto& s : p.series) points += s.points.size();
    if (points == 0) throw EmptySeries(static_cast<int>(i + 1));
    if (p.kind == ChartKind::pie) {
      for (const auto& s : p.series) {
        for (const auto& pt : s.points) {
          if (pt.value < 0) {
            throw Error("InvalidPanel", tag + ": pie values must be non-negative");
          }
        }
      }
    }
    if ((p.kind == ChartKind::stacked_bar || p.kind == ChartKind::grouped_bar) &&
        p.series.size() < 2) {
      throw Error("InvalidPanel", tag + ": stacked/grouped kinds need at least 2 series");
    }
    if (p.kind == ChartKind::line || p.kind == ChartKind::area) {
      for (const auto& s : p.series) {
        if (s.points.size() < 2) {
          throw Error("InvalidPanel", tag + ": line kinds need at least 2 points per series");
        }
      }
    }
  }
}

namespace detail_layout {

using namespace layoutc;

inline double fit_font(double preferred, double avail_w, double avail_h, size_t chars) {
  double f = preferred;
  if (chars > 0) f = std::min(f, avail_w / (kCharWidthFactor * static_cast<double>(chars)));
  f = std::min(f, avail_h);
  return std::max(f, 0.0);
}

inline double panel_heading_h(const PanelSpec& p) {
  return p.heading.empty() ? 0.0 : kHeadingHeight;
}

inline double panel_legend_h(const PanelSpec& p) {
  if (p.kind == ChartKind::pie) return 0.0;
  return p.series.size() >= 2 ? kLegendHeight : 0.0;
}

inline double desired_plot_h(const PanelSpec& p) {
  double h = p.requested_box && p.requested_box->height_px > 0
                 ? p.requested_box->height_px
                 : detail::kDefaultPanelHeight;
  return std::max(h, kMinPlotHeight);
}

struct PanelFrame {
  Box cell, heading, plot, legend;
  bool heading_below = false;
};

// Text centered in a box, font capped so the text box stays inside.
inline TextElement centered_text(const Box& in, std::string content, double max_font,
                                 std::string cls, int panel, int owner = -1) {
  TextElement t;
  double f = fit_font(max_font, std::max(in.w * 0.9, 0.0), std::max(in.h * 0.9, 0.0),
                      content.size());
  double w = std::min(text_width(f, content.size()), in.w);
  double h = std::min(f, in.h);
  t.box = Box{in.x + (in.w - w) / 2, in.y + (in.h - h) / 2, w, h};
  t.font_size = f;
  t.tx = in.x + in.w / 2;
  t.ty = t.box.y + h * 0.85;
  t.anchor = "middle";
  t.cls = std::move(cls);
  t.content = std::move(content);
  t.panel = panel;
  t.owner_mark = owner;
  return t;
}

inline TextElement left_text(const Box& in, std::string content, double max_font,
                             std::string cls, int panel) {
  TextElement t;
  double f = fit_font(max_font, std::max(in.w - 4, 0.0), std::max(in.h * 0.9, 0.0),
                      content.size());
  double w = std::min(text_width(f, content.size()), in.w);
  double h = std::min(f, in.h);
  t.box = Box{in.x + 2, in.y + (in.h - h) / 2, w, h};
  t.font_size = f;
  t.tx = t.box.x;
  t.ty = t.box.y + h * 0.85;
  t.anchor = "start";
  t.cls = std::move(cls);
  t.content = std::move(content);
  t.panel = panel;
  return t;
}

struct ChartArea {
  Box chart;       // data area inside the plot box, after gutters
  double gutter_left;
};

inline ChartArea chart_area(const PanelSpec& p, const Box& plot) {
  double left = p.kind == ChartKind::horizontal_bar ? std::min(88.0, plot.w * 0.45) : 40.0;
  if (plot.w - left - kGutterRight < 8) left = std::max(plot.w - kGutterRight - 8, 0.0);
  double ch = std::max(plot.h - kGutterTop - kGutterBottom, 1.0);
  double cw = std::max(plot.w - left - kGutterRight, 1.0);
  return {Box{plot.x + left, plot.y + kGutterTop, cw, ch}, left};
}

inline double max_abs_value(const PanelSpec& p) {
  double vmax = 0;
  if (p.kind == ChartKind::stacked_bar) {
    for (const auto& s : p.series) {
      double sum = 0;
      for (const auto& pt : s.points) sum += std::abs(pt.value);
      vmax = std::max(vmax, sum);
    }
  } else {
    for (const auto& s : p.series) {
      for (const auto& pt : s.points) vmax = std::max(vmax, std::abs(pt.value));
    }
  }
  return vmax > 0 ? vmax : 1.0;
}

}  // namespace detail_layout

/// Deterministic layout resolution. The canvas height auto-grows to fit the
/// requested panel boxes up to a 4x cap; beyond that rows are squeezed and,
/// when a panel cannot reach its minimum height, the layout is infeasible.
/// Vertical spacing defaults to max(16px, 4% of canvas height) and is kept
/// strictly below 1/(rows-1) of the final height whenever rows >= 2.
inline LayoutedFigure layout(const ChartIR& ir) {
  using namespace detail_layout;
  validate_ir(ir);

  const int n = static_cast<int>(ir.panels.size());
  const int rows = ir.arrangement.rows;
  const int cols = ir.arrangement.cols;
  const double W = ir.canvas.width_px > 0 ? ir.canvas.width_px : 640.0;
  const double H0 = ir.canvas.height_px > 0 ? ir.canvas.height_px : 480.0;
  const double title_band = ir.figure_title.empty() ? 0.0 : kTitleBand;

  const double cell_w = (W - 2 * kMargin - (cols - 1) * kHorizontalGap) / cols;
  if (cell_w < kMinCellWidth) {
    throw InfeasibleLayout("cell width " + format_number(cell_w) + "px is below the " +
                           format_number(kMinCellWidth) + "px minimum");
  }

  double s = std::max(16.0, 0.04 * H0);
  if (rows >= 2) s = std::min(s, 0.5 * H0 / (rows - 1));

  std::vector<double> row_h(static_cast<size_t>(rows), 0.0);
  for (int i = 0; i < n; ++i) {
    const PanelSpec& p = ir.panels[static_cast<size_t>(i)];
    int r = i / cols;
    row_h[static_cast<size_t>(r)] =
        std::max(row_h[static_cast<size_t>(r)],
                 panel_heading_h(p) + desired_plot_h(p) + panel_legend_h(p));
  }
  double content_h = 0;
  for (double h : row_h) content_h += h;
  double needed = content_h + (rows - 1) * s + 2 * kMargin + title_band;

  double H = std::max(H0, needed);
  bool squeezed = false;
  if (H > kGrowthCap * H0) {
    H = kGrowthCap * H0;
    squeezed = true;
    double avail = H - 2 * kMargin - title_band - (rows - 1) * s;
    double uniform = avail / rows;
    for (int i = 0; i < n; ++i) {
      const PanelSpec& p = ir.panels[static_cast<size_t>(i)];
      double plot_h = uniform - panel_heading_h(p) - panel_legend_h(p);
      if (plot_h < kMinPlotHeight) {
        throw InfeasibleLayout("panel " + std::to_string(i + 1) +
                               " cannot fit even at the 4x growth cap");
      }
    }
    std::fill(row_h.begin(), row_h.end(), uniform);
  }

  LayoutedFigure fig;
  fig.canvas = Box{0, 0, W, H};
  fig.rows = rows;
  fig.cols = cols;
  fig.spacing_v = rows >= 2 ? s : 0.0;
  fig.spacing_norm = rows >= 2 ? s / H : 0.0;

  fig.decor.push_back({Box{0, 0, W, H}, "#ffffff", "canvas"});
  if (!ir.figure_title.empty()) {
    Box band{kMargin, kMargin * 0.5, W - 2 * kMargin, title_band};
    fig.texts.push_back(centered_text(band, ir.figure_title, 16, "figure-title", -1));
  }

  double y = kMargin + title_band;
  int index = 0;
  for (int r = 0; r < rows && index < n; ++r) {
    for (int c = 0; c < cols && index < n; ++c, ++index) {
      const PanelSpec& p = ir.panels[static_cast<size_t>(index)];
      double panel_w = cell_w;
      if (p.requested_box && p.requested_box->width_px > 0) {
        panel_w = std::min(cell_w, static_cast<double>(p.requested_box->width_px));
      }
      double hh = panel_heading_h(p);
      double lh = panel_legend_h(p);
      double plot_h = squeezed ? row_h[static_cast<size_t>(r)] - hh - lh
                               : desired_plot_h(p);
      double x = kMargin + c * (cell_w + kHorizontalGap);

      PanelBoxes boxes;
      boxes.cell = Box{x, y, panel_w, hh + plot_h + lh};
      bool heading_below = p.heading_anchor == HeadingAnchor::below;
      double cy = y;
      if (!heading_below) {
        boxes.heading = Box{x, cy, panel_w, hh};
        cy += hh;
      }
      boxes.plot = Box{x, cy, panel_w, plot_h};
      cy += plot_h;
      boxes.legend = Box{x, cy, panel_w, lh};
      cy += lh;
      if (heading_below) boxes.heading = Box{x, cy, panel_w, hh};
      fig.panels.push_back(boxes);
    }
    y += row_h[static_cast<size_t>(r)] + s;
  }

  // Per-panel geometry: headings, axes, marks, labels, legends.
  for (int i = 0; i < n; ++i) {
    const PanelSpec& p = ir.panels[static_cast<size_t>(i)];
    const PanelBoxes& boxes = fig.panels[static_cast<size_t>(i)];
    if (!p.heading.empty()) {
      fig.texts.push_back(left_text(boxes.heading, p.heading, 12, "heading", i));
    }
    const auto& palette = p.palette.empty() ? default_palette() : p.palette;
    auto color = [&](size_t k) { return palette[k % palette.size()]; };
    int mark_id = 0;

    if (p.kind == ChartKind::pie) {
      // circle in the left part of the plot, one legend row per slice on the right
      std::vector<StatPoint> pts;
      for (const auto& s : p.series) {
        for (const auto& pt : s.points) pts.push_back(pt);
      }
      const Box& plot = boxes.plot;
      double cx = plot.x + plot.w * 0.30;
      double cyc = plot.y + plot.h * 0.5;
      double radius = std::max(std::min(plot.w * 0.26, plot.h * 0.42), 1.0);
      double total = 0;
      for (const auto& pt : pts) total += pt.value;
      double angle = -M_PI / 2;
      for (size_t k = 0; k < pts.size(); ++k) {
        double frac = total > 0 ? pts[k].value / total : 1.0 / pts.size();
        double sweep = frac * 2 * M_PI;
        double a0 = angle, a1 = angle + sweep;
        angle = a1;
        char d[256];
        if (frac >= 0.999) {
          std::snprintf(d, sizeof(d),
                        "M %.2f %.2f m %.2f 0 a %.2f %.2f 0 1 1 %.2f 0 a %.2f %.2f 0 1 1 %.2f 0 Z",
                        cx, cyc, -radius, radius, radius, 2 * radius, radius, radius,
                        -2 * radius);
        } else {
          std::snprintf(d, sizeof(d), "M %.2f %.2f L %.2f %.2f A %.2f %.2f 0 %d 1 %.2f %.2f Z",
                        cx, cyc, cx + radius * std::cos(a0), cyc + radius * std::sin(a0),
                        radius, radius, sweep > M_PI ? 1 : 0,
                        cx + radius * std::cos(a1), cyc + radius * std::sin(a1));
        }
        MarkElement m;
        m.box = Box{cx - radius, cyc - radius, 2 * radius, 2 * radius};
        m.shape = "slice";
        m.fill = color(k);
        m.data = d;
        m.panel = i;
        m.id = mark_id++;
        fig.marks.push_back(m);
      }
      double lx = plot.x + plot.w * 0.62;
      double lw = plot.w * 0.38 - 4;
      double row = plot.h / static_cast<double>(pts.size());
      for (size_t k = 0; k < pts.size(); ++k) {
        double ry = plot.y + k * row;
        double chip = std::min(6.0, row * 0.8);
        fig.decor.push_back({Box{lx, ry + (row - chip) / 2, chip, chip}, color(k), "chip"});
        std::string value_text = format_number(pts[k].value);
        double label_w = lw * 0.62 - chip - 4;
        double value_w = lw * 0.34;
        if (!pts[k].label.empty()) {
          Box lb{lx + chip + 2, ry, std::max(label_w, 0.0), row};
          fig.texts.push_back(left_text(lb, pts[k].label, 8, "legend-label", i));
        }
        if (p.show_value_labels) {
          Box vb{lx + chip + 2 + std::max(label_w, 0.0) + 2, ry, std::max(value_w, 0.0), row};
          TextElement t = left_text(vb, value_text, 8, "value-label", i);
          t.owner_mark = static_cast<int>(k);
          fig.texts.push_back(t);
        }
      }
      continue;
    }

    // Cartesian panels
    ChartArea area = chart_area(p, boxes.plot);
    const Box& chart = area.chart;
    fig.axes.push_back({i, 'x', chart.x, chart.bottom(), chart.right(), chart.bottom()});
    fig.axes.push_back({i, 'y', chart.x, chart.y, chart.x, chart.bottom()});

    double vmax = max_abs_value(p);
    const bool horizontal = p.kind == ChartKind::horizontal_bar;

    // y-scale labels (or x-scale for horizontal bars)
    {
      std::string top = format_number(vmax);
      double gl = area.gutter_left;
      if (horizontal) {
        Box zero_box{chart.x, chart.bottom() + 2, 30, kGutterBottom - 4};
        fig.texts.push_back(left_text(zero_box, "0", 7, "tick", i));
        Box max_box{chart.right() - 34, chart.bottom() + 2, 34, kGutterBottom - 4};
        TextElement t = centered_text(max_box, top, 7, "tick", i);
        fig.texts.push_back(t);
      } else {
        double f = fit_font(7, std::max(gl - 6, 2.0), 8, top.size());
        Box top_box{boxes.plot.x + 2, chart.y, std::max(gl - 6, 2.0), f + 1};
        fig.texts.push_back(left_text(top_box, top, 7, "tick", i));
        if (chart.h >= 2 * f + 4) {
          Box zero_box{boxes.plot.x + 2, chart.bottom() - f - 1, std::max(gl - 6, 2.0), f + 1};
          fig.texts.push_back(left_text(zero_box, "0", 7, "tick", i));
        }
      }
    }

    auto add_value_label = [&](const Box& bar, double value, int owner) {
      if (!p.show_value_labels) return;
      std::string text = format_number(value);
      TextElement t;
      double f = fit_font(9, bar.w * 0.9, bar.h * 0.9, text.size());
      double w = std::min(text_width(f, text.size()), bar.w * 0.9);
      double h = std::min(f, bar.h * 0.9);
      t.box = Box{bar.x + (bar.w - w) / 2, bar.y + (bar.h - h) / 2, w, h};
      t.font_size = f;
      t.tx = bar.x + bar.w / 2;
      t.ty = t.box.y + h * 0.85;
      t.anchor = "middle";
      t.cls = "value-label";
      t.color = "#ffffff";
      t.content = std::move(text);
      t.panel = i;
      t.owner_mark = owner;
      fig.texts.push_back(t);
    };

    auto add_category_label = [&](const Box& slot, const std::string& label) {
      if (label.empty()) return;
      fig.texts.push_back(centered_text(slot, label, 8, "tick", i));
    };

    if (horizontal) {
      // one horizontal band per bar; category labels in the left gutter
      struct Row {
        std::string label;
        double value;
        size_t color_index;
      };
      std::vector<Row> rows_list;
      if (p.series.size() == 1) {
        for (size_t k = 0; k < p.series[0].points.size(); ++k) {
          const auto& pt = p.series[0].points[k];
          rows_list.push_back({pt.label, pt.value, k});
        }
      } else {
        for (size_t si = 0; si < p.series.size(); ++si) {
          for (size_t k = 0; k < p.series[si].points.size(); ++k) {
            const auto& pt = p.series[si].points[k];
            std::string lbl = p.series[si].label;
            if (!pt.label.empty()) lbl = lbl.empty() ? pt.label : lbl + " / " + pt.label;
            rows_list.push_back({lbl, pt.value, k});
          }
        }
      }
      double band = chart.h / static_cast<double>(rows_list.size());
      for (size_t k = 0; k < rows_list.size(); ++k) {
        double by = chart.y + k * band;
        double bh = band * 0.7;
        double blen = std::abs(rows_list[k].value) / vmax * chart.w * kValueScale;
        Box bar{chart.x, by + (band - bh) / 2, std::max(blen, 0.0), bh};
        MarkElement m;
        m.box = bar;
        m.shape = "rect";
        m.fill = color(rows_list[k].color_index);
        m.panel = i;
        m.id = mark_id;
        fig.marks.push_back(m);
        add_value_label(bar, rows_list[k].value, mark_id);
        ++mark_id;
        Box slot{boxes.plot.x + 2, by, std::max(area.gutter_left - 6, 2.0), band};
        add_category_label(slot, rows_list[k].label);
      }
    } else if (p.kind == ChartKind::line || p.kind == ChartKind::area) {
      size_t npts = 0;
      for (const auto& s : p.series) npts = std::max(npts, s.points.size());
      for (size_t si = 0; si < p.series.size(); ++si) {
        const auto& s = p.series[si];
        std::string points_attr;
        double minx = 1e18, miny = 1e18, maxx = -1e18, maxy = -1e18;
        for (size_t k = 0; k < s.points.size(); ++k) {
          double px = chart.x + (k + 0.5) * chart.w / static_cast<double>(npts);
          double py = chart.bottom() -
                      std::abs(s.points[k].value) / vmax * chart.h * kValueScale;
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px, py);
          points_attr += buf;
          minx = std::min(minx, px);
          maxx = std::max(maxx, px);
          miny = std::min(miny, py);
          maxy = std::max(maxy, py);
        }
        if (p.kind == ChartKind::area) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", maxx, chart.bottom());
          points_attr += buf;
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", minx, chart.bottom());
          points_attr += buf;
          maxy = chart.bottom();
        }
        MarkElement m;
        m.box = Box{minx, miny, std::max(maxx - minx, 0.1), std::max(maxy - miny, 0.1)};
        m.shape = "polyline";
        m.fill = color(si);
        m.data = points_attr;
        m.panel = i;
        m.id = mark_id++;
        fig.marks.push_back(m);
      }
      if (!p.series.empty()) {
        const auto& first = p.series[0];
        for (size_t k = 0; k < first.points.size(); ++k) {
          double slot_w = chart.w / static_cast<double>(npts);
          Box slot{chart.x + k * slot_w, chart.bottom() + 2, slot_w, kGutterBottom - 4};
          add_category_label(slot, first.points[k].label);
        }
      }
    } else if (p.kind == ChartKind::stacked_bar) {
      double slot = chart.w / static_cast<double>(p.series.size());
      for (size_t si = 0; si < p.series.size(); ++si) {
        double bx = chart.x + si * slot;
        double bw = slot * 0.7;
        double base = chart.bottom();
        for (size_t k = 0; k < p.series[si].points.size(); ++k) {
          double seg_h = std::abs(p.series[si].points[k].value) / vmax * chart.h * kValueScale;
          Box bar{bx + (slot - bw) / 2, base - seg_h, bw, seg_h};
          MarkElement m;
          m.box = bar;
          m.shape = "rect";
          m.fill = color(k);
          m.panel = i;
          m.id = mark_id;
          fig.marks.push_back(m);
          add_value_label(bar, p.series[si].points[k].value, mark_id);
          ++mark_id;
          base -= seg_h;
        }
        Box slot_box{bx, chart.bottom() + 2, slot, kGutterBottom - 4};
        add_category_label(slot_box, p.series[si].label);
      }
    } else {
      // vertical bars: bar / grouped_bar / histogram; a single unnamed series
      // puts its points on the x-axis, multiple series form groups.
      bool grouped = p.series.size() > 1;
      size_t ngroups = grouped ? p.series.size() : p.series[0].points.size();
      double slot = chart.w / static_cast<double>(ngroups);
      for (size_t g = 0; g < ngroups; ++g) {
        double gx = chart.x + g * slot;
        size_t nb = grouped ? p.series[g].points.size() : 1;
        double inner = p.kind == ChartKind::histogram ? slot : slot * 0.8;
        double bw = inner / static_cast<double>(nb);
        for (size_t b = 0; b < nb; ++b) {
          const StatPoint& pt = grouped ? p.series[g].points[b] : p.series[0].points[g];
          double bh = std::abs(pt.value) / vmax * chart.h * kValueScale;
          double bx = gx + (slot - inner) / 2 + b * bw;
          double drawn_w = p.kind == ChartKind::histogram ? bw : bw * 0.9;
          Box bar{bx + (bw - drawn_w) / 2, chart.bottom() - bh, drawn_w, bh};
          MarkElement m;
          m.box = bar;
          m.shape = "rect";
          m.fill = color(grouped ? b : g);
          m.panel = i;
          m.id = mark_id;
          fig.marks.push_back(m);
          add_value_label(bar, pt.value, mark_id);
          ++mark_id;
        }
        Box slot_box{gx, chart.bottom() + 2, slot, kGutterBottom - 4};
        add_category_label(slot_box, grouped ? p.series[g].label : p.series[0].points[g].label);
      }
    }

    // legend strip for multi-series cartesian panels
    if (p.series.size() >= 2 && boxes.legend.h > 0) {
      std::vector<std::string> entries;
      if (p.kind == ChartKind::grouped_bar || p.kind == ChartKind::bar ||
          p.kind == ChartKind::histogram || p.kind == ChartKind::stacked_bar) {
        // grouped bars are colored by point label
        for (const auto& pt : p.series[0].points) entries.push_back(pt.label);
      } else {
        for (const auto& s : p.series) entries.push_back(s.label);
      }
      double lx = boxes.legend.x + 4;
      const double ly = boxes.legend.y;
      const double lh = boxes.legend.h;
      for (size_t k = 0; k < entries.size(); ++k) {
        if (entries[k].empty()) continue;
        double f = 7;
        double w = text_width(f, entries[k].size());
        double entry_w = 8 + 3 + w + 10;
        if (lx + entry_w > boxes.legend.right()) break;  // keep what fits
        fig.decor.push_back({Box{lx, ly + (lh - 6) / 2, 6, 6}, color(k), "chip"});
        Box tb{lx + 9, ly, w + 2, lh};
        fig.texts.push_back(left_text(tb, entries[k], f, "legend-label", i));
        lx += entry_w;
      }
    }
  }

  return fig;
}

struct OverlapViolation {
  std::string first;
  std::string second;
  Box a, b;
};

/// Brute-force pairwise check of text-vs-text and text-vs-mark boxes using
/// the same metrics the layout placed them with. A value label is allowed to
/// sit inside the mark it annotates.
inline std::vector<OverlapViolation> detect_overlaps(const LayoutedFigure& figure,
                                                     const std::string& svg) {
  std::vector<OverlapViolation> out;
  auto describe = [](const TextElement& t) {
    return t.cls + " \"" + t.content + "\"";
  };
  for (size_t i = 0; i < figure.texts.size(); ++i) {
    for (size_t j = i + 1; j < figure.texts.size(); ++j) {
      const auto& a = figure.texts[i];
      const auto& b = figure.texts[j];
      if (a.box.intersects(b.box)) {
        out.push_back({describe(a), describe(b), a.box, b.box});
      }
    }
  }
  for (const auto& t : figure.texts) {
    for (const auto& m : figure.marks) {
      if (t.panel == m.panel && t.owner_mark == m.id) continue;
      if (t.box.intersects(m.box)) {
        out.push_back({describe(t), m.shape + " mark #" + std::to_string(m.id) +
                                        " in panel " + std::to_string(m.panel + 1),
                       t.box, m.box});
      }
    }
  }
  // sanity: the svg must carry exactly the text elements the layout placed
  if (!svg.empty()) {
    size_t count = 0, pos = 0;
    while ((pos = svg.find("<text", pos)) != std::string::npos) {
      ++count;
      pos += 5;
    }
    if (count != figure.texts.size()) {
      out.push_back({"svg text count " + std::to_string(count),
                     "layout text count " + std::to_string(figure.texts.size()),
                     Box{},
                     Box{}});
    }
  }
  return out;
}

}  // namespace statfig
