#pragma once

#include <array>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>

#include "statfig/errors.hpp"
#include "statfig/jsonio.hpp"

namespace statfig {

enum class PromptId {
  complexity_filter,
  text_synthesis,
  metadata_synthesis,
  preference_judge,
  ranker,
  coder,
  judge,
  generic,
};

inline constexpr std::array<PromptId, 8> kAllPromptIds = {
    PromptId::complexity_filter, PromptId::text_synthesis,
    PromptId::metadata_synthesis, PromptId::preference_judge,
    PromptId::ranker,             PromptId::coder,
    PromptId::judge,              PromptId::generic,
};

inline const char* prompt_id_name(PromptId id) {
  switch (id) {
    case PromptId::complexity_filter: return "complexity_filter";
    case PromptId::text_synthesis: return "text_synthesis";
    case PromptId::metadata_synthesis: return "metadata_synthesis";
    case PromptId::preference_judge: return "preference_judge";
    case PromptId::ranker: return "ranker";
    case PromptId::coder: return "coder";
    case PromptId::judge: return "judge";
    case PromptId::generic: return "generic";
  }
  return "generic";
}

inline std::optional<PromptId> prompt_id_from_name(const std::string& name) {
  for (PromptId id : kAllPromptIds) {
    if (name == prompt_id_name(id)) return id;
  }
  return std::nullopt;
}

/// Placeholders are {lower_snake_case} markers; literal braces elsewhere in a
/// template body (JSON shapes and the like) never match.
inline std::set<std::string> scan_placeholders(const std::string& body) {
  static const std::regex re(R"(\{([a-z][a-z0-9_]*)\})");
  std::set<std::string> names;
  for (auto it = std::sregex_iterator(body.begin(), body.end(), re);
       it != std::sregex_iterator(); ++it) {
    names.insert((*it)[1].str());
  }
  return names;
}

struct PromptTemplate {
  PromptId id = PromptId::generic;
  std::string body;
  std::set<std::string> required_bindings;

  static PromptTemplate make(PromptId id, std::string body) {
    PromptTemplate t;
    t.id = id;
    t.required_bindings = scan_placeholders(body);
    t.body = std::move(body);
    return t;
  }
};

namespace prompt_text {

inline constexpr const char* complexity_filter = R"PT(You are an expert annotator with extensive knowledge of statistical charts. Your task is to evaluate whether the given infographic qualifies as a complex infographic or not. The definition of a complex infographic is as follows: A complex infographic contains multiple subcharts, each with an associated title, heading, and context. Additionally, it is information-dense, presenting a large amount of data in a concise manner.

Please refer {examples} for annotated examples.

Infographic: {input}
)PT";

inline constexpr const char* text_synthesis = R"PT(You are an intelligent AI assistant that can thoroughly read and understand charts. Can you give a detailed description of the attached chart in plain English, such that a human is able to reconstruct the chart based on the generated description? For each section, mention all the statistics and the associated text attached to it in the image, like the title or heading for that section. Do not mention the type of chart it is, the number of sections in the image, or use terms like 'section,' 'chart,' or 'image.' Write everything in a single passage, without sub-passages, so it feels like all information is provided in one continuous context. Ensure that for each section, all statistics and corresponding titles or text are present, and remove source information in the final output. Follow the writing style as shown in the provided examples.

Examples:
{examples}

Chart: {input}
)PT";

inline constexpr const char* metadata_synthesis = R"PT(You are an expert statistician whose task is to analyze an image containing multiple subcharts. Your goal is to provide detailed information about each subchart. Given this context, please count the total number of subcharts in the image and ensure you provide the correct number. Next, identify the type of subchart (for example, bar, line, or pie) and describe the axes by specifying their labels and units. Extract the key statistics or data points presented in the subchart. Also, identify any associated text, such as the title, heading, or other related descriptions. Determine where the subchart is positioned within the image, and describe its location relative to other subcharts. Similarly, specify where the text linked to the subchart is located. Additionally, describe the background of the subchart (whether it’s a solid color, gradient, or otherwise), and measure the dimensions of the subchart in pixels. Finally, identify the fonts used for the text in the subchart.

Please provide thorough and detailed responses to each aspect. You can refer to the given examples for guidance.

Examples:
{examples}

Input: {input}
)PT";

inline constexpr const char* preference_judge = R"PT(As a Natural Language Processing Expert, your task is to determine the superior metadata output for a given text-to-metadata generation task. You are provided with two metadata outputs, Option 1 {metadata1} and Option 2 {metadata2}, both generated by the same model but with different temperature settings. Your goal is to select the metadata that most accurately represents the information derived from the input text. Make sure the selected metadata captures all relevant details and aligns with the intended structure of the task. The output should consist solely of the selected option, without any additional information beyond the provided choices.

Input text:
{input_text}
)PT";

inline constexpr const char* ranker = R"PT(You are a statistician expert tasked with selecting the best metadata for the Input_text_clean: {input_text}. Your goal is to choose the most optimal metadata based on the following questions:

1. Title of the context?
2. Summary of the context (what is being inferred)?
3. How many subcharts are there? For each subchart, identify:
   - Type of subchart
   - Axes (including associated text)
   - Statistics
   - Text (title or heading)
   - Position relative to other subcharts
   - Position of text
   - Background type
   - Dimensions (in px)
   - Fonts (one-word description)
   - Alignment (horizontal or vertical)
   - Subchart summary (include any text that doesn’t fit the title or heading).

Return the response in JSON format with this structure:
{
    "title": {},
    "summary": {},
    "subchart_1": {
        "kind": {},
        "axis": {},
        "stats": {},
        "text": {},
        "position_chart": {},
        "position_chart_text": {},
        "background": {},
        "dimensions": {},
        "fonts": {},
        "alignment": {},
        "summary": {}
    },
    "subchart_2": { ... }
}

You will be given three options. Choose the most optimal metadata, focusing first on the correct number of subcharts. The metadata should align properly, with correct textual insights and statistics. Provide only the best option as output.

Option 1:
{option_1}

Option 2:
{option_2}

Option 3:
{option_3}
)PT";

inline constexpr const char* coder = R"PT(You are an expert coder with strong graphic understanding. You will be provided with metadata to generate Python code for a final infographic. The metadata answers:

- Title of the context?
- Summary of the context (what is it inferring)?
- Number of subcharts? For each subchart:
  1) Subchart type
  2) Axes (with text)
  3) Stats of the subchart
  4) Text (title or heading)
  5) Subchart position relative to others
  6) Position of text
  7) Background type
  8) Dimensions (px)
  9) Fonts (one-word)
  10) Alignment (horizontal or vertical)
  11) Subchart summary (include text not in title or heading)

Return the response in JSON format:
{ "title": {}, "summary": {}, "subchart_1": { "kind": {}, "axis": {}, "stats": {}, "text": {}, "position_chart": {}, "background": {}, "dimensions": {}, "fonts": {}, "alignment": {}, "summary": {} }, "subchart_2": {...} }.

Key points for Python code:
1) Ensure the number of subcharts matches the metadata. For bar charts, bars should be on the y-axis and sized properly.
2) Maintain correct axes, stats, and chart positions. The chart should be visually appealing, with no extra axes.
3) Include title and summary, ensure alignment, and avoid cramped spacing.

Tips:
- Adjust vertical spacing to avoid crowding.
- Use distinct colors, avoiding grey/black.
- Place data values inside bars for readability.
- Center the title and use a clean layout.
- Adjust height for proper subchart fitting.

Use Python libraries like Plotly or Plotnine. The output should only contain Python code, no JSON or additional information.

Metadata:
{metadata}

{feedback}
)PT";

inline constexpr const char* judge = R"PT(You are a judge LLM with expertise in evaluating Python code and graphical visualizations. Your task is to assess the provided Python code against the metadata. Based on the metadata, determine whether the code satisfies all the following constraints:

- **Subchart Count**: Ensure the code generates exactly the number of subcharts specified in the metadata.
- **Subchart Type**: Verify that each subchart (e.g., bar chart, line chart) matches the specified type.
- **Axes and Stats**: Ensure the axes (including text) and statistics of each subchart match the metadata.
- **Subchart Position**: Check that the position of each subchart and its associated text is correct relative to other subcharts.
- **Alignment and Layout**: Confirm that the alignment (horizontal or vertical) and layout of subcharts follow the metadata and are visually appealing.
- **Fonts and Dimensions**: Make sure the fonts and dimensions (in px) for each subchart match the metadata.
- **Background and Colors**: Verify that the background type and colors (avoid grey/black) are correct and distinguish between elements.
- **Title and Summary**: Ensure the overall title and summary from the metadata are reflected in the final output.

Additionally, check for the following:
- Vertical spacing should avoid cramped visuals.
- Data values should be visible inside bars for bar charts.
- No extra axes should be added beyond what’s described in the metadata.
- There should be no errors such as `ValueError: Vertical spacing cannot be greater than (1 / (rows - 1))`.

If you are statisfied with the code replly with "Yes" . Else your feedback should specify whether all the constraints are met, and if not, provide specific details on what is missing or incorrect in the code.

Metadata:
{metadata}

Code:
{code}
)PT";

inline constexpr const char* generic = R"PT({input}
)PT";

}  // namespace prompt_text

class PromptCatalog {
 public:
  static const PromptCatalog& embedded() {
    static const PromptCatalog catalog = make_embedded();
    return catalog;
  }

  /// Loads <prompt id>.txt files from a catalog directory. Missing files
  /// fall back to the embedded template.
  static PromptCatalog from_directory(const std::string& dir) {
    PromptCatalog catalog = make_embedded();
    for (PromptId id : kAllPromptIds) {
      std::string path = dir + "/" + prompt_id_name(id) + ".txt";
      std::ifstream in(path, std::ios::binary);
      if (!in) continue;
      std::string body{std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>()};
      catalog.templates_[static_cast<size_t>(id)] = PromptTemplate::make(id, body);
    }
    return catalog;
  }

  const PromptTemplate& get(PromptId id) const {
    return templates_[static_cast<size_t>(id)];
  }

 private:
  static PromptCatalog make_embedded() {
    PromptCatalog c;
    auto set = [&](PromptId id, const char* body) {
      c.templates_[static_cast<size_t>(id)] = PromptTemplate::make(id, body);
    };
    set(PromptId::complexity_filter, prompt_text::complexity_filter);
    set(PromptId::text_synthesis, prompt_text::text_synthesis);
    set(PromptId::metadata_synthesis, prompt_text::metadata_synthesis);
    set(PromptId::preference_judge, prompt_text::preference_judge);
    set(PromptId::ranker, prompt_text::ranker);
    set(PromptId::coder, prompt_text::coder);
    set(PromptId::judge, prompt_text::judge);
    set(PromptId::generic, prompt_text::generic);
    return c;
  }

  std::array<PromptTemplate, 8> templates_;
};

/// Deterministic single-pass substitution. Every placeholder present in the
/// template must be bound; extra bindings are ignored.
inline std::string render_prompt(const PromptCatalog& catalog, PromptId id,
                                 const std::map<std::string, std::string>& bindings) {
  const PromptTemplate& tpl = catalog.get(id);
  for (const std::string& name : tpl.required_bindings) {
    if (!bindings.count(name)) throw MissingBinding(name);
  }
  std::string out;
  out.reserve(tpl.body.size());
  size_t i = 0;
  while (i < tpl.body.size()) {
    char c = tpl.body[i];
    if (c == '{') {
      size_t close = tpl.body.find('}', i + 1);
      if (close != std::string::npos) {
        std::string name = tpl.body.substr(i + 1, close - i - 1);
        auto it = tpl.required_bindings.count(name) ? bindings.find(name) : bindings.end();
        if (it != bindings.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

inline std::string render_prompt(PromptId id,
                                 const std::map<std::string, std::string>& bindings) {
  return render_prompt(PromptCatalog::embedded(), id, bindings);
}

}  // namespace statfig
