#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "statfig/errors.hpp"
#include "statfig/jsonio.hpp"
#include "statfig/textutil.hpp"

namespace statfig {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class ChartKind {
  bar,
  horizontal_bar,
  grouped_bar,
  stacked_bar,
  line,
  pie,
  histogram,
  area,
  unknown,
};

/// Total, case-insensitive mapping from a free-text kind description to a
/// ChartKind. Unmapped inputs land on `unknown`; the raw string is kept on
/// the subchart either way.
inline ChartKind normalize_kind(const std::string& raw) {
  std::string t = to_lower(raw);
  auto has = [&](const char* w) { return t.find(w) != std::string::npos; };
  if (has("histogram")) return ChartKind::histogram;
  if (has("pie")) return ChartKind::pie;
  if (has("bar")) {
    if (has("stack")) return ChartKind::stacked_bar;
    if (has("group")) return ChartKind::grouped_bar;
    if (has("horizontal")) return ChartKind::horizontal_bar;
    return ChartKind::bar;
  }
  if (has("line")) return ChartKind::line;
  if (has("area")) return ChartKind::area;
  return ChartKind::unknown;
}

inline const char* kind_name(ChartKind k) {
  switch (k) {
    case ChartKind::bar: return "bar";
    case ChartKind::horizontal_bar: return "horizontal_bar";
    case ChartKind::grouped_bar: return "grouped_bar";
    case ChartKind::stacked_bar: return "stacked_bar";
    case ChartKind::line: return "line";
    case ChartKind::pie: return "pie";
    case ChartKind::histogram: return "histogram";
    case ChartKind::area: return "area";
    case ChartKind::unknown: return "unknown";
  }
  return "unknown";
}

enum class Alignment { horizontal, vertical, unspecified };

inline Alignment parse_alignment(const std::string& raw) {
  std::string t = to_lower(raw);
  if (t.find("horizontal") != std::string::npos) return Alignment::horizontal;
  if (t.find("vertical") != std::string::npos) return Alignment::vertical;
  return Alignment::unspecified;
}

inline const char* alignment_name(Alignment a) {
  switch (a) {
    case Alignment::horizontal: return "horizontal";
    case Alignment::vertical: return "vertical";
    case Alignment::unspecified: return "";
  }
  return "";
}

struct AxisSpec {
  std::string raw;             // always retained verbatim
  std::string x_label;
  std::string y_label;
  std::string x_units;
  std::string y_units;

  bool operator==(const AxisSpec&) const = default;
};

struct StatPoint {
  std::string label;
  double value = 0.0;
  std::string unit;  // "percent" when the source value carried a % sign

  bool operator==(const StatPoint&) const = default;
};

struct StatSeries {
  std::string label;  // category; empty for unlabelled single-category stats
  std::vector<StatPoint> points;

  bool operator==(const StatSeries&) const = default;
};

struct StatBlock {
  std::string raw;
  std::vector<StatSeries> series;

  bool operator==(const StatBlock&) const = default;

  size_t numeric_count() const {
    size_t n = 0;
    for (const auto& s : series) n += s.points.size();
    return n;
  }
};

struct Dimensions {
  int width_px = 0;   // 0 means not stated
  int height_px = 0;
  std::string raw;
  std::vector<double> stated;  // every pixel number found, reading order

  bool operator==(const Dimensions&) const = default;
};

struct Subchart {
  ChartKind kind = ChartKind::unknown;
  std::string kind_raw;
  AxisSpec axis;
  StatBlock stats;
  std::string text;  // heading / title attached to the subchart
  std::string position_chart;
  std::optional<std::string> position_chart_text;
  std::string background;
  Dimensions dimensions;
  std::string fonts;
  Alignment alignment = Alignment::unspecified;
  std::string summary;

  bool operator==(const Subchart&) const = default;
};

struct MetadataDoc {
  std::string title;
  std::string summary;
  std::vector<Subchart> subcharts;  // order is subchart_1, subchart_2, ...

  bool operator==(const MetadataDoc&) const = default;
};

struct ValidationFinding {
  std::string path;
  std::string code;
  std::string message;

  bool operator==(const ValidationFinding&) const = default;
};

struct ValidationReport {
  std::vector<ValidationFinding> errors;
  std::vector<ValidationFinding> warnings;

  bool is_valid() const { return errors.empty(); }
};

// ---------------------------------------------------------------------------
// Field parsers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string collapse_ws(const std::string& s) {
  std::string out;
  bool prev_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!prev_space && !out.empty()) out.push_back(' ');
      prev_space = true;
    } else {
      out.push_back(c);
      prev_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

/// "40%" -> (40, "percent"); "12.5" -> (12.5, ""); non-numeric -> nullopt.
inline std::optional<StatPoint> parse_stat_value(std::string label, std::string value_text) {
  std::string v = trim(value_text);
  std::string unit;
  if (!v.empty() && v.back() == '%') {
    unit = "percent";
    v = trim(v.substr(0, v.size() - 1));
  }
  if (v.empty()) return std::nullopt;
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) return std::nullopt;
    return StatPoint{trim(std::move(label)), d, unit};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline StatSeries& series_for(std::vector<StatSeries>& all, const std::string& label) {
  for (auto& s : all) {
    if (s.label == label) return s;
  }
  all.push_back(StatSeries{label, {}});
  return all.back();
}

/// Prose stat grammar, as used in metadata descriptions:
///   "Cat: Label: 40%, Label2: 59%; Cat2: Label: 47%, ..."
/// Categories are ';'-separated; the first item of a category segment may
/// carry the category name as an extra leading "...:" part.
inline std::vector<StatSeries> parse_stats_prose(const std::string& raw) {
  std::vector<StatSeries> out;
  for (const std::string& segment : split(raw, ';')) {
    std::string category;
    bool first = true;
    for (std::string item : split(segment, ',')) {
      item = trim(item);
      if (item.rfind("and ", 0) == 0) item = trim(item.substr(4));
      if (item.empty()) continue;
      auto parts = split(item, ':');
      if (parts.size() < 2) {
        first = false;
        continue;
      }
      std::string value_text = parts.back();
      std::string label;
      size_t label_begin = 0;
      if (first && parts.size() >= 3) {
        category = trim(parts[0]);
        label_begin = 1;
      }
      for (size_t i = label_begin; i + 1 < parts.size(); ++i) {
        if (i > label_begin) label += ":";
        label += parts[i];
      }
      if (auto point = parse_stat_value(label, value_text)) {
        series_for(out, category).points.push_back(*point);
      }
      first = false;
    }
  }
  return out;
}

inline std::optional<StatPoint> json_stat_point(const std::string& label, const json& v) {
  if (v.is_number()) return StatPoint{label, v.get<double>(), ""};
  if (v.is_string()) return parse_stat_value(label, v.get<std::string>());
  return std::nullopt;
}

inline std::vector<StatSeries> parse_stats_json(const json& j) {
  std::vector<StatSeries> out;
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        StatSeries series{key, {}};
        for (const auto& [label, v] : value.items()) {
          if (auto p = json_stat_point(label, v)) series.points.push_back(*p);
        }
        out.push_back(std::move(series));
      } else if (auto p = json_stat_point(key, value)) {
        series_for(out, "").points.push_back(*p);
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (auto p = json_stat_point("", v)) series_for(out, "").points.push_back(*p);
    }
  }
  return out;
}

}  // namespace detail

inline StatBlock parse_stats(const std::string& raw) {
  StatBlock block;
  block.raw = raw;
  std::string t = trim(raw);
  if (!t.empty() && (t.front() == '{' || t.front() == '[')) {
    json j = json::parse(t, nullptr, false);
    if (!j.is_discarded()) {
      block.series = detail::parse_stats_json(j);
      return block;
    }
  }
  block.series = detail::parse_stats_prose(raw);
  return block;
}

inline Dimensions parse_dimensions(const std::string& raw) {
  Dimensions d;
  d.raw = raw;
  static const std::regex px_re(R"((\d+(?:\.\d+)?)\s*px)", std::regex::icase);
  auto begin = std::sregex_iterator(raw.begin(), raw.end(), px_re);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    d.stated.push_back(std::stod((*it)[1].str()));
  }
  if (d.stated.empty()) {
    static const std::regex wh_re(R"((\d+)\s*[xX]\s*(\d+))");
    std::smatch m;
    if (std::regex_search(raw, m, wh_re)) {
      d.stated.push_back(std::stod(m[1].str()));
      d.stated.push_back(std::stod(m[2].str()));
    }
  }
  if (!d.stated.empty()) d.width_px = static_cast<int>(d.stated[0]);
  if (d.stated.size() > 1) d.height_px = static_cast<int>(d.stated[1]);
  return d;
}

inline AxisSpec parse_axis(const std::string& raw) {
  AxisSpec a;
  a.raw = raw;
  static const std::regex x_re(
      R"(x[- ]axis\s+(?:represents|is|shows|:)\s*([^,]+))", std::regex::icase);
  static const std::regex y_re(
      R"(y[- ]axis\s+(?:represents|is|shows|:)\s*([^,]+))", std::regex::icase);
  auto clean = [](std::string s) {
    s = trim(s);
    while (!s.empty() && s.back() == '.') s.pop_back();
    return trim(s);
  };
  std::smatch m;
  if (std::regex_search(raw, m, x_re)) a.x_label = clean(m[1].str());
  if (std::regex_search(raw, m, y_re)) a.y_label = clean(m[1].str());
  auto unit_of = [](const std::string& label) -> std::string {
    std::string t = to_lower(label);
    if (t.find("percent") != std::string::npos) return "percent";
    return "";
  };
  a.x_units = unit_of(a.x_label);
  a.y_units = unit_of(a.y_label);
  return a;
}

// ---------------------------------------------------------------------------
// Document parse / serialize
// ---------------------------------------------------------------------------

namespace detail {

inline std::string field_as_string(const json& j, const char* key) {
  if (!j.contains(key)) return "";
  const json& v = j.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

inline Subchart subchart_from_json(const json& j, int index) {
  if (!j.is_object()) {
    throw MalformedDocument("subchart_" + std::to_string(index) + " is not an object");
  }
  Subchart sc;
  sc.kind_raw = field_as_string(j, "kind");
  sc.kind = normalize_kind(sc.kind_raw);
  if (j.contains("axis") && j.at("axis").is_object()) {
    const json& ax = j.at("axis");
    sc.axis.raw = ax.dump();
    sc.axis.x_label = field_as_string(ax, "x");
    if (sc.axis.x_label.empty()) sc.axis.x_label = field_as_string(ax, "x_label");
    sc.axis.y_label = field_as_string(ax, "y");
    if (sc.axis.y_label.empty()) sc.axis.y_label = field_as_string(ax, "y_label");
    sc.axis.x_units = field_as_string(ax, "x_units");
    sc.axis.y_units = field_as_string(ax, "y_units");
  } else {
    sc.axis = parse_axis(field_as_string(j, "axis"));
  }
  if (j.contains("stats") && !j.at("stats").is_string()) {
    sc.stats.raw = j.at("stats").is_null() ? "" : j.at("stats").dump();
    sc.stats.series = parse_stats_json(j.at("stats"));
  } else {
    sc.stats = parse_stats(field_as_string(j, "stats"));
  }
  sc.text = field_as_string(j, "text");
  sc.position_chart = field_as_string(j, "position_chart");
  if (j.contains("position_chart_text") && !j.at("position_chart_text").is_null()) {
    sc.position_chart_text = field_as_string(j, "position_chart_text");
  }
  sc.background = field_as_string(j, "background");
  sc.dimensions = parse_dimensions(field_as_string(j, "dimensions"));
  sc.fonts = field_as_string(j, "fonts");
  sc.alignment = parse_alignment(field_as_string(j, "alignment"));
  sc.summary = field_as_string(j, "summary");
  return sc;
}

inline MetadataDoc doc_from_json(const json& j) {
  if (!j.contains("title")) throw MissingField("title");
  if (!j.contains("summary")) throw MissingField("summary");
  static const std::regex key_re(R"(^subchart_0*(\d+)$)");
  std::map<int, const json*> by_index;
  for (const auto& [key, value] : j.items()) {
    std::smatch m;
    if (std::regex_match(key, m, key_re)) {
      int idx = std::stoi(m[1].str());
      if (!by_index.emplace(idx, &value).second) throw DuplicateSubchartIndex(idx);
    }
  }
  if (by_index.empty()) throw MissingField("subchart_1");
  int expected = 1;
  for (const auto& [idx, _] : by_index) {
    if (idx != expected) throw MissingField("subchart_" + std::to_string(expected));
    ++expected;
  }
  MetadataDoc doc;
  doc.title = field_as_string(j, "title");
  doc.summary = field_as_string(j, "summary");
  for (const auto& [idx, value] : by_index) {
    doc.subcharts.push_back(subchart_from_json(*value, idx));
  }
  return doc;
}

/// Fallback extractor for the prose metadata form: labelled sentences under
/// "Subchart N:" section markers.
inline Subchart subchart_from_prose(const std::string& section_raw) {
  std::string s = collapse_ws(section_raw);
  Subchart sc;
  std::smatch m;

  static const std::regex kind_re(
      R"(this is (?:also |another )?(?:a |an )?([a-z][a-z \-]*?(?:chart|graph|plot|histogram)))",
      std::regex::icase);
  if (std::regex_search(s, m, kind_re)) {
    sc.kind_raw = trim(m[1].str());
  } else {
    static const std::regex word_re(R"(\b(bar|pie|line|histogram|area)\b)", std::regex::icase);
    if (std::regex_search(s, m, word_re)) sc.kind_raw = to_lower(m[1].str());
  }
  sc.kind = normalize_kind(sc.kind_raw);

  static const std::regex axis_re(R"(([^.]*\bax[ei]s\b[^.]*)\.)", std::regex::icase);
  if (std::regex_search(s, m, axis_re)) sc.axis = parse_axis(trim(m[1].str()));

  static const std::regex stats_re(R"(statistics are:?\s*(.*))", std::regex::icase);
  if (std::regex_search(s, m, stats_re)) {
    std::string rest = m[1].str();
    size_t end = rest.find(". The ");
    if (end == std::string::npos) end = rest.find(". the ");
    std::string stats_text = end == std::string::npos ? rest : rest.substr(0, end);
    // strip a trailing sentence period
    stats_text = trim(stats_text);
    if (!stats_text.empty() && stats_text.back() == '.') stats_text.pop_back();
    sc.stats = parse_stats(stats_text);
  }

  static const std::regex text_re(
      R"(text associated with this subchart is:?\s*\"([^\"]*)\")", std::regex::icase);
  if (std::regex_search(s, m, text_re)) sc.text = m[1].str();

  static const std::regex pos_re(
      R"(((?:the )?(?:position of the subchart is|subchart is positioned)[^.]*)\.)",
      std::regex::icase);
  if (std::regex_search(s, m, pos_re)) {
    std::string pos = trim(m[1].str());
    size_t split_at = to_lower(pos).find(", and the text");
    if (split_at != std::string::npos) {
      sc.position_chart_text = trim(pos.substr(split_at + 2));
      pos = trim(pos.substr(0, split_at));
    }
    sc.position_chart = pos;
  }

  static const std::regex bg_re(R"(background is ([^,.]+))", std::regex::icase);
  if (std::regex_search(s, m, bg_re)) sc.background = trim(m[1].str());

  static const std::regex dims_re(R"(dimensions of ([^.]+?)(?:\.|$))", std::regex::icase);
  if (std::regex_search(s, m, dims_re)) sc.dimensions = parse_dimensions(trim(m[1].str()));

  static const std::regex fonts_re(R"(fonts used are ([^.]+))", std::regex::icase);
  if (std::regex_search(s, m, fonts_re)) sc.fonts = trim(m[1].str());

  return sc;
}

inline MetadataDoc parse_prose_metadata(const std::string& text) {
  static const std::regex marker_re(R"(\*{0,2}Subchart\s*(\d*)\*{0,2}\s*:)",
                                    std::regex::icase);
  struct Marker {
    int index;
    size_t begin, end;
  };
  std::vector<Marker> markers;
  auto it = std::sregex_iterator(text.begin(), text.end(), marker_re);
  int auto_index = 0;
  for (; it != std::sregex_iterator(); ++it) {
    const std::smatch& m = *it;
    ++auto_index;
    int idx = m[1].str().empty() ? auto_index : std::stoi(m[1].str());
    markers.push_back({idx, static_cast<size_t>(m.position(0)),
                       static_cast<size_t>(m.position(0) + m.length(0))});
  }
  if (markers.empty()) {
    throw MalformedDocument("no JSON object and no subchart sections found");
  }
  std::map<int, std::string> sections;
  for (size_t i = 0; i < markers.size(); ++i) {
    size_t begin = markers[i].end;
    size_t end = i + 1 < markers.size() ? markers[i + 1].begin : text.size();
    if (!sections.emplace(markers[i].index, text.substr(begin, end - begin)).second) {
      throw DuplicateSubchartIndex(markers[i].index);
    }
  }
  int expected = 1;
  for (const auto& [idx, _] : sections) {
    if (idx != expected) throw MissingField("subchart_" + std::to_string(expected));
    ++expected;
  }
  MetadataDoc doc;
  for (const auto& [idx, section] : sections) {
    doc.subcharts.push_back(subchart_from_prose(section));
  }
  return doc;
}

}  // namespace detail

/// Parses serialized metadata. Strict JSON (possibly surrounded by prose) is
/// the primary format; the prose form falls back to the labelled-sentence
/// extractor. Subchart numbering must be contiguous from 1.
inline MetadataDoc parse_metadata(const std::string& text) {
  if (auto obj = extract_json_object(text)) {
    return detail::doc_from_json(*obj);
  }
  return detail::parse_prose_metadata(text);
}

inline json subchart_to_json(const Subchart& sc) {
  json j = json::object();
  j["kind"] = sc.kind_raw;
  j["axis"] = sc.axis.raw;
  j["stats"] = sc.stats.raw;
  j["text"] = sc.text;
  j["position_chart"] = sc.position_chart;
  if (sc.position_chart_text) j["position_chart_text"] = *sc.position_chart_text;
  j["background"] = sc.background;
  j["dimensions"] = sc.dimensions.raw;
  j["fonts"] = sc.fonts;
  j["alignment"] = alignment_name(sc.alignment);
  j["summary"] = sc.summary;
  return j;
}

inline json doc_to_json(const MetadataDoc& doc) {
  json j = json::object();
  j["title"] = doc.title;
  j["summary"] = doc.summary;
  for (size_t i = 0; i < doc.subcharts.size(); ++i) {
    j["subchart_" + std::to_string(i + 1)] = subchart_to_json(doc.subcharts[i]);
  }
  return j;
}

/// Canonical serialization: fixed key order, 2-space indent, trailing newline.
/// parse_metadata(serialize_metadata(d)) == d for any parsed document.
inline std::string serialize_metadata(const MetadataDoc& doc) {
  return doc_to_json(doc).dump(2) + "\n";
}

/// Mechanical checks from the reviewer checklist: subchart count, known
/// kinds, axis text, at least one statistic, placement phrase, positive
/// stated dimensions. Empty title/summary are warnings, not errors.
inline ValidationReport validate(const MetadataDoc& doc) {
  ValidationReport report;
  auto err = [&](std::string path, std::string code, std::string msg) {
    report.errors.push_back({std::move(path), std::move(code), std::move(msg)});
  };
  auto warn = [&](std::string path, std::string code, std::string msg) {
    report.warnings.push_back({std::move(path), std::move(code), std::move(msg)});
  };
  if (doc.title.empty()) warn("title", "EmptyTitle", "title is empty");
  if (doc.summary.empty()) warn("summary", "EmptySummary", "summary is empty");
  if (doc.subcharts.empty()) {
    err("subcharts", "NoSubcharts", "document has no subcharts");
  }
  for (size_t i = 0; i < doc.subcharts.size(); ++i) {
    const Subchart& sc = doc.subcharts[i];
    std::string base = "subchart_" + std::to_string(i + 1);
    if (sc.kind == ChartKind::unknown) {
      err(base + ".kind", "UnknownKind", "unknown chart kind \"" + sc.kind_raw + "\"");
    }
    if (trim(sc.axis.raw).empty()) {
      err(base + ".axis", "EmptyAxis", "axis description is empty");
    }
    if (sc.stats.numeric_count() == 0) {
      err(base + ".stats", "NoStatistics", "no numeric statistics found");
    }
    if (trim(sc.position_chart).empty()) {
      err(base + ".position_chart", "EmptyPosition", "placement phrase is empty");
    }
    for (double v : sc.dimensions.stated) {
      if (v <= 0) {
        err(base + ".dimensions", "PositiveDimensions",
            "stated dimension " + format_number(v) + "px is not positive");
        break;
      }
    }
  }
  return report;
}

/// Every numeric value from every subchart's statistics, sorted ascending.
/// Numbers in dimensions, fonts or positions are not statistics.
inline std::vector<double> extract_numbers(const MetadataDoc& doc) {
  std::vector<double> out;
  for (const auto& sc : doc.subcharts) {
    for (const auto& series : sc.stats.series) {
      for (const auto& p : series.points) out.push_back(p.value);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Concatenation of the document's textual fields, used for word and
/// sentence statistics. Fields are joined as sentences.
inline std::string textual_content(const MetadataDoc& doc) {
  std::string out;
  auto add = [&](const std::string& field) {
    std::string t = trim(field);
    if (t.empty()) return;
    if (!out.empty()) out += " ";
    out += t;
    char last = out.back();
    if (last != '.' && last != '!' && last != '?') out += ".";
  };
  add(doc.title);
  add(doc.summary);
  for (const auto& sc : doc.subcharts) {
    add(sc.kind_raw);
    add(sc.axis.raw);
    add(sc.stats.raw);
    add(sc.text);
    add(sc.position_chart);
    if (sc.position_chart_text) add(*sc.position_chart_text);
    add(sc.background);
    add(sc.dimensions.raw);
    add(sc.fonts);
    add(sc.summary);
  }
  return out;
}

}  // namespace statfig
