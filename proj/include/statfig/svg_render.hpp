#pragma once

#include <cstdio>
#include <string>

#include "statfig/chart_ir.hpp"
#include "statfig/layout.hpp"

namespace statfig {

namespace detail_svg {

inline std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

}  // namespace detail_svg

/// Serializes a resolved figure to standalone SVG 1.1. Pure function of its
/// inputs: identical (figure, ir) produce byte-identical output.
inline std::string render_svg(const LayoutedFigure& figure, const ChartIR& ir) {
  using detail_svg::escape;
  using detail_svg::num;
  const int n = static_cast<int>(ir.panels.size());

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(figure.canvas.w) + "\" height=\"" + num(figure.canvas.h) +
         "\" viewBox=\"0 0 " + num(figure.canvas.w) + " " + num(figure.canvas.h) + "\">\n";

  for (const auto& d : figure.decor) {
    if (d.cls != "canvas") continue;
    out += "  <rect class=\"canvas\" x=\"" + num(d.box.x) + "\" y=\"" + num(d.box.y) +
           "\" width=\"" + num(d.box.w) + "\" height=\"" + num(d.box.h) + "\" fill=\"" +
           d.fill + "\"/>\n";
  }

  // figure-level text (title)
  for (const auto& t : figure.texts) {
    if (t.panel != -1) continue;
    out += "  <text class=\"" + t.cls + "\" x=\"" + num(t.tx) + "\" y=\"" + num(t.ty) +
           "\" font-size=\"" + num(t.font_size) + "\" font-family=\"monospace\"" +
           (t.anchor == "middle" ? " text-anchor=\"middle\"" : "") + " fill=\"" + t.color +
           "\">" + escape(t.content) + "</text>\n";
  }

  for (int i = 0; i < n; ++i) {
    out += "  <g class=\"panel\" id=\"panel-" + std::to_string(i + 1) + "\">\n";
    for (const auto& d : figure.decor) {
      if (d.cls != "chip") continue;
      // chips are assigned to panels through position; emit under the panel
      // whose cell contains them
      if (!figure.panels[static_cast<size_t>(i)].cell.contains(d.box) &&
          !figure.panels[static_cast<size_t>(i)].plot.contains(d.box)) {
        continue;
      }
      out += "    <rect class=\"chip\" x=\"" + num(d.box.x) + "\" y=\"" + num(d.box.y) +
             "\" width=\"" + num(d.box.w) + "\" height=\"" + num(d.box.h) + "\" fill=\"" +
             d.fill + "\"/>\n";
    }
    for (const auto& m : figure.marks) {
      if (m.panel != i) continue;
      if (m.shape == "rect") {
        out += "    <rect class=\"mark bar\" x=\"" + num(m.box.x) + "\" y=\"" +
               num(m.box.y) + "\" width=\"" + num(m.box.w) + "\" height=\"" +
               num(m.box.h) + "\" fill=\"" + m.fill + "\"/>\n";
      } else if (m.shape == "slice") {
        out += "    <path class=\"mark slice\" d=\"" + m.data + "\" fill=\"" + m.fill +
               "\"/>\n";
      } else if (m.shape == "polyline") {
        bool filled = ir.panels[static_cast<size_t>(i)].kind == ChartKind::area;
        out += "    <polyline class=\"mark line\" points=\"" + m.data + "\" fill=\"" +
               (filled ? m.fill : std::string("none")) + "\" stroke=\"" + m.fill +
               "\" stroke-width=\"1.5\"/>\n";
      }
    }
    for (const auto& a : figure.axes) {
      if (a.panel != i) continue;
      out += std::string("    <line class=\"axis axis-") + a.which + "\" x1=\"" +
             num(a.x1) + "\" y1=\"" + num(a.y1) + "\" x2=\"" + num(a.x2) + "\" y2=\"" +
             num(a.y2) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    }
    for (const auto& t : figure.texts) {
      if (t.panel != i) continue;
      out += "    <text class=\"" + t.cls + "\" x=\"" + num(t.tx) + "\" y=\"" +
             num(t.ty) + "\" font-size=\"" + num(t.font_size) +
             "\" font-family=\"monospace\"" +
             (t.anchor == "middle" ? " text-anchor=\"middle\"" : "") + " fill=\"" +
             t.color + "\">" + escape(t.content) + "</text>\n";
    }
    out += "  </g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace statfig
