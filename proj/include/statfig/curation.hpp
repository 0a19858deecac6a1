#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "statfig/gateway.hpp"
#include "statfig/metadata.hpp"
#include "statfig/metagen.hpp"
#include "statfig/textutil.hpp"

namespace statfig::curation {

struct SourceRecord {
  std::string id;
  std::string image_ref;  // opaque reference to a chart image or its description
  std::string provenance;
};

enum class ReviewStatus { unreviewed, verified, corrected, rejected };

inline const char* review_status_name(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::unreviewed: return "unreviewed";
    case ReviewStatus::verified: return "verified";
    case ReviewStatus::corrected: return "corrected";
    case ReviewStatus::rejected: return "rejected";
  }
  return "unreviewed";
}

inline ReviewStatus review_status_from_name(const std::string& name) {
  if (name == "verified") return ReviewStatus::verified;
  if (name == "corrected") return ReviewStatus::corrected;
  if (name == "rejected") return ReviewStatus::rejected;
  return ReviewStatus::unreviewed;
}

/// The five reviewer checklist items: subchart count, per-subchart type,
/// axis description, extracted statistics, subchart and text positions.
struct ReviewChecklist {
  bool count = false;
  bool types = false;
  bool axes = false;
  bool stats = false;
  bool positions = false;

  bool all() const { return count && types && axes && stats && positions; }
};

struct ReviewState {
  ReviewStatus status = ReviewStatus::unreviewed;
  ReviewChecklist checklist;
  std::string note;
};

struct DatasetRecord {
  std::string id;
  std::string input_text;
  MetadataDoc metadata;
  ReviewState review;
  std::string split;  // train | val | test | empty
};

inline constexpr int kReviewSchemaVersion = 1;

inline json record_to_json(const DatasetRecord& rec) {
  json j = json::object();
  j["id"] = rec.id;
  j["input_text"] = rec.input_text;
  j["metadata"] = doc_to_json(rec.metadata);
  j["review"] = {{"status", review_status_name(rec.review.status)},
                 {"checklist",
                  {{"count", rec.review.checklist.count},
                   {"types", rec.review.checklist.types},
                   {"axes", rec.review.checklist.axes},
                   {"stats", rec.review.checklist.stats},
                   {"positions", rec.review.checklist.positions}}},
                 {"note", rec.review.note}};
  j["split"] = rec.split;
  return j;
}

inline DatasetRecord record_from_json(const json& j) {
  DatasetRecord rec;
  rec.id = detail::field_as_string(j, "id");
  rec.input_text = detail::field_as_string(j, "input_text");
  if (j.contains("metadata")) {
    if (j["metadata"].is_object()) {
      rec.metadata = detail::doc_from_json(j["metadata"]);
    } else if (j["metadata"].is_string()) {
      rec.metadata = parse_metadata(j["metadata"].get<std::string>());
    }
  }
  if (j.contains("review") && j["review"].is_object()) {
    const json& r = j["review"];
    rec.review.status = review_status_from_name(detail::field_as_string(r, "status"));
    rec.review.note = detail::field_as_string(r, "note");
    if (r.contains("checklist") && r["checklist"].is_object()) {
      const json& c = r["checklist"];
      rec.review.checklist.count = c.value("count", false);
      rec.review.checklist.types = c.value("types", false);
      rec.review.checklist.axes = c.value("axes", false);
      rec.review.checklist.stats = c.value("stats", false);
      rec.review.checklist.positions = c.value("positions", false);
    }
  }
  rec.split = detail::field_as_string(j, "split");
  return rec;
}

// ---------------------------------------------------------------------------
// Complexity filter
// ---------------------------------------------------------------------------

struct ClassifyResult {
  bool is_complex = false;
  bool reply_parsed = false;
  std::string raw_reply;
};

/// Few-shot yes/no classification; an unparseable reply counts as not
/// complex and is visible through reply_parsed.
inline ClassifyResult classify_complexity(const SourceRecord& record,
                                          const BackendConfig& backend, Gateway& gateway,
                                          const PromptCatalog* catalog = nullptr,
                                          const std::string& examples = "",
                                          const std::string& model_id = "classifier") {
  const PromptCatalog& cat = catalog ? *catalog : PromptCatalog::embedded();
  CompletionRequest req =
      make_request(cat, PromptId::complexity_filter,
                   {{"input", record.image_ref}, {"examples", examples}}, model_id, 0.0,
                   1000, record.image_ref);
  Completion completion = gateway.complete(backend, req);
  ClassifyResult result;
  result.raw_reply = completion.text;
  std::string t = to_lower(trim(completion.text));
  size_t i = 0;
  while (i < t.size() && std::ispunct(static_cast<unsigned char>(t[i]))) ++i;
  if (t.compare(i, 3, "yes") == 0) {
    result.is_complex = true;
    result.reply_parsed = true;
  } else if (t.compare(i, 2, "no") == 0) {
    result.is_complex = false;
    result.reply_parsed = true;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Leak-free input text synthesis
// ---------------------------------------------------------------------------

/// Banned content for synthesized input text: chart-kind phrases, the
/// chart/image/section/subchart vocabulary, and source attributions.
inline std::vector<std::string> leak_violations(const std::string& text) {
  std::string t = to_lower(text);
  std::vector<std::string> found;
  static const std::vector<std::string> phrases = {
      "bar chart",   "bar graph",   "pie chart",     "pie graph",
      "line chart",  "line graph",  "stacked bar",   "grouped bar",
      "horizontal bar", "area chart", "scatter plot", "histogram",
      "pew research", "source:",    "courtesy of",
  };
  for (const auto& p : phrases) {
    if (t.find(p) != std::string::npos) found.push_back(p);
  }
  static const std::regex word_re(
      R"(\b(charts?|images?|sections?|sub-?charts?|infographics?|panels?)\b)",
      std::regex::icase);
  auto it = std::sregex_iterator(t.begin(), t.end(), word_re);
  for (; it != std::sregex_iterator(); ++it) found.push_back((*it)[1].str());
  return found;
}

struct TextSynthesisResult {
  std::string text;
  int attempts = 0;
  bool stats_covered = false;   // every metadata number appears in the text
  double coverage = 0.0;        // fraction of metadata numbers present
};

/// Renders the chart-description prompt and post-filters the reply with the
/// leak scanner; rejected replies are retried up to the attempt budget.
inline TextSynthesisResult synthesize_text(const SourceRecord& record,
                                           const std::optional<MetadataDoc>& metadata,
                                           const BackendConfig& backend, Gateway& gateway,
                                           const PromptCatalog* catalog = nullptr,
                                           int max_attempts = 3,
                                           const std::string& model_id = "describer") {
  const PromptCatalog& cat = catalog ? *catalog : PromptCatalog::embedded();
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    std::map<std::string, std::string> bindings = {{"input", record.image_ref},
                                                   {"examples", ""}};
    // retries carry the attempt index so scripted backends can vary replies
    if (attempt > 1) bindings["attempt"] = std::to_string(attempt);
    CompletionRequest req = make_request(cat, PromptId::text_synthesis, bindings, model_id,
                                         0.7, 1000, record.image_ref);
    Completion completion = gateway.complete(backend, req);
    if (!leak_violations(completion.text).empty()) continue;
    TextSynthesisResult result;
    result.text = completion.text;
    result.attempts = attempt;
    if (metadata) {
      std::vector<double> wanted = extract_numbers(*metadata);
      std::vector<double> present = scan_numbers(completion.text);
      size_t covered = 0;
      for (double v : wanted) {
        for (double p : present) {
          if (std::abs(p - v) <= 1e-9) {
            ++covered;
            break;
          }
        }
      }
      result.coverage =
          wanted.empty() ? 1.0 : static_cast<double>(covered) / wanted.size();
      result.stats_covered = covered == wanted.size();
    }
    return result;
  }
  throw LeakCheckExhausted(record.id);
}

// ---------------------------------------------------------------------------
// Metadata synthesis
// ---------------------------------------------------------------------------

struct MetadataSynthesisResult {
  std::optional<DatasetRecord> draft;
  std::string error;
  std::string raw_reply;
};

inline MetadataSynthesisResult synthesize_metadata(const SourceRecord& record,
                                                   const BackendConfig& backend,
                                                   Gateway& gateway,
                                                   const PromptCatalog* catalog = nullptr,
                                                   const std::string& model_id =
                                                       "synthesizer") {
  const PromptCatalog& cat = catalog ? *catalog : PromptCatalog::embedded();
  CompletionRequest req =
      make_request(cat, PromptId::metadata_synthesis,
                   {{"input", record.image_ref}, {"examples", ""}}, model_id, 0.2, 1000,
                   record.image_ref);
  MetadataSynthesisResult result;
  Completion completion = gateway.complete(backend, req);
  result.raw_reply = completion.text;
  try {
    DatasetRecord draft;
    draft.id = record.id;
    draft.metadata = parse_metadata(completion.text);
    draft.review.status = ReviewStatus::unreviewed;
    result.draft = std::move(draft);
  } catch (const Error& e) {
    result.error = e.what();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Review round-trip
// ---------------------------------------------------------------------------

inline void review_export(const std::vector<DatasetRecord>& records,
                          const std::string& path) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& rec : records) {
    json j = json::object();
    j["schema_version"] = kReviewSchemaVersion;
    json body = record_to_json(rec);
    for (auto& [key, value] : body.items()) j[key] = value;
    lines.push_back(std::move(j));
  }
  write_jsonl(path, lines);
}

namespace detail_review {

inline void diff_json(const json& a, const json& b, const std::string& prefix,
                      std::vector<std::string>& out) {
  if (a == b) return;
  if (a.is_object() && b.is_object()) {
    std::vector<std::string> keys;
    for (const auto& [k, _] : a.items()) keys.push_back(k);
    for (const auto& [k, _] : b.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    for (const auto& k : keys) {
      std::string path = prefix.empty() ? k : prefix + "." + k;
      if (!a.contains(k) || !b.contains(k)) {
        out.push_back(path);
      } else {
        diff_json(a.at(k), b.at(k), path, out);
      }
    }
    return;
  }
  out.push_back(prefix.empty() ? "(root)" : prefix);
}

}  // namespace detail_review

struct RecordDiff {
  std::string id;
  std::vector<std::string> changed_paths;
  ReviewStatus status_before = ReviewStatus::unreviewed;
  ReviewStatus status_after = ReviewStatus::unreviewed;
};

struct ImportResult {
  std::vector<DatasetRecord> records;
  std::vector<RecordDiff> diffs;  // only records that changed
};

/// Re-imports an edited review file. Every edited metadata must validate,
/// and verified/corrected records require a fully-true checklist.
inline ImportResult review_import(const std::string& path,
                                  const std::vector<DatasetRecord>& originals = {}) {
  ImportResult result;
  for (const json& line : read_jsonl(path)) {
    int version = line.value("schema_version", -1);
    if (version != kReviewSchemaVersion) {
      throw SchemaVersionMismatch(version, kReviewSchemaVersion);
    }
    DatasetRecord rec = record_from_json(line);
    ValidationReport report = validate(rec.metadata);
    if (!report.is_valid()) {
      throw InvalidEditedMetadata(
          rec.id, "edited metadata is invalid: " + report.errors[0].path + " " +
                      report.errors[0].code);
    }
    if ((rec.review.status == ReviewStatus::verified ||
         rec.review.status == ReviewStatus::corrected) &&
        !rec.review.checklist.all()) {
      throw InvalidEditedMetadata(rec.id,
                                  std::string(review_status_name(rec.review.status)) +
                                      " status requires every checklist item to be true");
    }
    result.records.push_back(std::move(rec));
  }
  for (const auto& rec : result.records) {
    auto orig = std::find_if(originals.begin(), originals.end(),
                             [&](const DatasetRecord& r) { return r.id == rec.id; });
    if (orig == originals.end()) continue;
    std::vector<std::string> paths;
    detail_review::diff_json(doc_to_json(orig->metadata), doc_to_json(rec.metadata), "",
                             paths);
    if (!paths.empty() || orig->review.status != rec.review.status) {
      result.diffs.push_back({rec.id, paths, orig->review.status, rec.review.status});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Preference pairs
// ---------------------------------------------------------------------------

struct PreferenceRecord {
  std::string prompt_text;  // the rendered generation prompt (x)
  std::string chosen;       // y_w
  std::string rejected;     // y_l
  std::string judge_model;
  double t_chosen_source = 0;
  double t_rejected_source = 0;
  bool swapped = false;  // option order permutation shown to the judge
  std::string chosen_hash;
  std::string rejected_hash;
};

inline bool verify_preference_record(const PreferenceRecord& rec) {
  return rec.chosen != rec.rejected && hex64(fnv1a64(rec.chosen)) == rec.chosen_hash &&
         hex64(fnv1a64(rec.rejected)) == rec.rejected_hash;
}

inline json preference_to_json(const PreferenceRecord& rec) {
  return json{{"prompt_text", rec.prompt_text},
              {"chosen", rec.chosen},
              {"rejected", rec.rejected},
              {"judge_model", rec.judge_model},
              {"temperatures",
               {{"chosen_source", rec.t_chosen_source},
                {"rejected_source", rec.t_rejected_source}}},
              {"swapped", rec.swapped},
              {"hashes", {{"chosen", rec.chosen_hash}, {"rejected", rec.rejected_hash}}}};
}

struct PreferenceOutcome {
  std::optional<PreferenceRecord> record;
  std::string discard_reason;  // set when no record was produced
};

/// Two generations at distinct temperatures, judged pairwise. Option order is
/// randomized per call and recorded, so judge position bias stays measurable.
inline PreferenceOutcome build_preference_pairs(
    const std::string& input_text, const GeneratorConfig& generator, double t_low,
    double t_high, const RankerConfig& judge, Gateway& gateway, uint64_t seed,
    const PromptCatalog* catalog = nullptr) {
  if (t_low == t_high) throw Error("ConfigError", "preference temperatures must differ");
  const PromptCatalog& cat = catalog ? *catalog : PromptCatalog::embedded();

  auto generate = [&](double temperature) {
    CompletionRequest req =
        make_request(cat, generator.prompt, {{"input", input_text}, {"examples", ""}},
                     generator.model_id, temperature);
    return std::make_pair(gateway.complete(generator.backend, req).text,
                          req.messages[0].content);
  };
  auto [low_text, prompt_text] = generate(t_low);
  auto [high_text, prompt_text2] = generate(t_high);
  (void)prompt_text2;

  if (low_text == high_text) return {std::nullopt, "identical outputs"};
  try {
    (void)parse_metadata(low_text);
    (void)parse_metadata(high_text);
  } catch (const Error&) {
    return {std::nullopt, "unparseable candidate"};
  }

  std::mt19937_64 rng(seed);
  bool swapped = (rng() & 1) != 0;
  const std::string& first = swapped ? high_text : low_text;
  const std::string& second = swapped ? low_text : high_text;

  CompletionRequest judge_req = make_request(
      cat, PromptId::preference_judge,
      {{"input_text", input_text}, {"metadata1", first}, {"metadata2", second}},
      judge.model_id, judge.temperature);
  Completion reply = gateway.complete(judge.backend, judge_req);

  static const std::regex opt_re(R"(option[^0-9]{0,3}([12]))", std::regex::icase);
  std::smatch m;
  int winner_pos = 0;
  if (std::regex_search(reply.text, m, opt_re)) {
    winner_pos = std::stoi(m[1].str());
  } else {
    std::string t = trim(reply.text);
    if (t.size() == 1 && (t[0] == '1' || t[0] == '2')) winner_pos = t[0] - '0';
  }
  if (winner_pos == 0) return {std::nullopt, "unparseable judge reply"};

  bool winner_is_low = (winner_pos == 1) != swapped;
  PreferenceRecord rec;
  rec.prompt_text = prompt_text;
  rec.chosen = winner_is_low ? low_text : high_text;
  rec.rejected = winner_is_low ? high_text : low_text;
  rec.judge_model = judge.model_id;
  rec.t_chosen_source = winner_is_low ? t_low : t_high;
  rec.t_rejected_source = winner_is_low ? t_high : t_low;
  rec.swapped = swapped;
  rec.chosen_hash = hex64(fnv1a64(rec.chosen));
  rec.rejected_hash = hex64(fnv1a64(rec.rejected));
  return {rec, ""};
}

// ---------------------------------------------------------------------------
// Dataset statistics and splits
// ---------------------------------------------------------------------------

struct DatasetStats {
  size_t n_records = 0;
  double avg_words_metadata = 0;
  double median_words_metadata = 0;
  double avg_words_input = 0;
  double median_words_input = 0;
  double avg_sentences_metadata = 0;
  double avg_sentences_input = 0;
  double avg_subcharts = 0;
  double median_subcharts = 0;
  int max_subcharts = 0;
  int min_subcharts = 0;
};

namespace detail_stats {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return (v[mid - 1] + v[mid]) / 2.0;
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail_stats

inline DatasetStats dataset_stats(const std::vector<DatasetRecord>& records) {
  DatasetStats stats;
  stats.n_records = records.size();
  if (records.empty()) return stats;
  std::vector<double> words_meta, words_input, sents_meta, sents_input, subcharts;
  for (const auto& rec : records) {
    std::string meta_text = textual_content(rec.metadata);
    words_meta.push_back(static_cast<double>(tokenize(meta_text).size()));
    words_input.push_back(static_cast<double>(tokenize(rec.input_text).size()));
    sents_meta.push_back(static_cast<double>(count_sentences(meta_text)));
    sents_input.push_back(static_cast<double>(count_sentences(rec.input_text)));
    subcharts.push_back(static_cast<double>(rec.metadata.subcharts.size()));
  }
  stats.avg_words_metadata = detail_stats::mean(words_meta);
  stats.median_words_metadata = detail_stats::median(words_meta);
  stats.avg_words_input = detail_stats::mean(words_input);
  stats.median_words_input = detail_stats::median(words_input);
  stats.avg_sentences_metadata = detail_stats::mean(sents_meta);
  stats.avg_sentences_input = detail_stats::mean(sents_input);
  stats.avg_subcharts = detail_stats::mean(subcharts);
  stats.median_subcharts = detail_stats::median(subcharts);
  stats.max_subcharts = static_cast<int>(*std::max_element(subcharts.begin(), subcharts.end()));
  stats.min_subcharts = static_cast<int>(*std::min_element(subcharts.begin(), subcharts.end()));
  return stats;
}

/// Stats field labels for the text table, one per reported value.
inline std::vector<std::pair<std::string, std::string>> stats_rows(const DatasetStats& s) {
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  return {
      {"# of data points", std::to_string(s.n_records)},
      {"Avg. # of words in metadata", fmt(s.avg_words_metadata)},
      {"Median # of words in metadata", fmt(s.median_words_metadata)},
      {"Avg. # of words in input text", fmt(s.avg_words_input)},
      {"Median # of words in input text", fmt(s.median_words_input)},
      {"Avg. # of sentences in metadata", fmt(s.avg_sentences_metadata)},
      {"Avg. # of sentences in input text", fmt(s.avg_sentences_input)},
      {"Avg. # of sub-charts in each metadata", fmt(s.avg_subcharts)},
      {"Median # of sub-charts in each metadata", fmt(s.median_subcharts)},
      {"Maximum # of sub-charts in each metadata", std::to_string(s.max_subcharts)},
      {"Minimum # of sub-charts in each metadata", std::to_string(s.min_subcharts)},
  };
}

inline json stats_to_json(const DatasetStats& s) {
  return json{{"n_records", s.n_records},
              {"avg_words_metadata", s.avg_words_metadata},
              {"median_words_metadata", s.median_words_metadata},
              {"avg_words_input", s.avg_words_input},
              {"median_words_input", s.median_words_input},
              {"avg_sentences_metadata", s.avg_sentences_metadata},
              {"avg_sentences_input", s.avg_sentences_input},
              {"avg_subcharts", s.avg_subcharts},
              {"median_subcharts", s.median_subcharts},
              {"max_subcharts", s.max_subcharts},
              {"min_subcharts", s.min_subcharts}};
}

inline std::string stats_to_table(const DatasetStats& s) {
  std::string out;
  for (const auto& [label, value] : stats_rows(s)) {
    out += label;
    out += ": ";
    out += value;
    out += "\n";
  }
  return out;
}

/// Deterministic 80:5:15 split by record-id hash. Rejected records get no
/// split; in strict mode unreviewed records get none either.
inline void assign_splits(std::vector<DatasetRecord>& records, uint64_t seed,
                          bool strict = false) {
  for (auto& rec : records) {
    if (rec.review.status == ReviewStatus::rejected) {
      rec.split = "";
      continue;
    }
    if (strict && rec.review.status == ReviewStatus::unreviewed) {
      rec.split = "";
      continue;
    }
    uint64_t h = fnv1a64(std::to_string(seed) + ":" + rec.id);
    uint64_t bucket = h % 100;
    rec.split = bucket < 80 ? "train" : bucket < 85 ? "val" : "test";
  }
}

}  // namespace statfig::curation
