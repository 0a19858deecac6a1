#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "statfig/gateway.hpp"
#include "statfig/metadata.hpp"

namespace statfig {

struct GeneratorConfig {
  BackendConfig backend;
  std::string model_id;
  double temperature = 0.5;
  PromptId prompt = PromptId::metadata_synthesis;
  std::string label;
};

struct CandidateMetadata {
  std::string generator_label;
  std::string raw_text;
  std::optional<MetadataDoc> doc;
  std::string parse_error;
  ValidationReport validation;
  double heuristic_score = 0.0;
  bool transport_failed = false;
};

enum class RankMethod { llm_ranker, heuristic_fallback };

struct RankDecision {
  size_t chosen_index = 0;
  RankMethod method = RankMethod::heuristic_fallback;
  std::string rationale_text;
};

struct HeuristicWeights {
  double parse = 0.4;
  double kinds = 0.2;
  double stats = 0.2;
  double grounding = 0.2;

  double sum() const { return parse + kinds + stats + grounding; }
};

struct RankerConfig {
  BackendConfig backend;
  std::string model_id;
  double temperature = 0.0;
};

struct StageConfig {
  std::vector<GeneratorConfig> generators;
  std::optional<RankerConfig> ranker;
  HeuristicWeights weights;
  const PromptCatalog* catalog = nullptr;
};

/// One candidate per generator config, in config order. Failed calls yield a
/// candidate with the error recorded; only a total wipeout raises.
inline std::vector<CandidateMetadata> generate_candidates(
    const std::string& input_text, const std::vector<GeneratorConfig>& configs,
    Gateway& gateway, const PromptCatalog* catalog = nullptr) {
  if (configs.empty()) throw Error("ConfigError", "no generators configured");
  const PromptCatalog& cat = catalog ? *catalog : PromptCatalog::embedded();
  std::vector<CandidateMetadata> candidates;
  size_t failures = 0;
  for (const auto& cfg : configs) {
    CandidateMetadata cand;
    cand.generator_label = cfg.label.empty() ? cfg.model_id : cfg.label;
    try {
      CompletionRequest req = make_request(
          cat, cfg.prompt,
          {{"input", input_text}, {"examples", ""}, {"label", cand.generator_label}},
          cfg.model_id, cfg.temperature);
      Completion completion = gateway.complete(cfg.backend, req);
      cand.raw_text = completion.text;
      try {
        cand.doc = parse_metadata(cand.raw_text);
        cand.validation = validate(*cand.doc);
      } catch (const Error& parse_err) {
        cand.parse_error = parse_err.what();
      }
    } catch (const Error& transport_err) {
      cand.transport_failed = true;
      cand.parse_error = transport_err.what();
      ++failures;
    }
    candidates.push_back(std::move(cand));
  }
  if (failures == configs.size()) throw AllBackendsFailed();
  return candidates;
}

/// Weighted testable signals, normalized by the weight sum so the score stays
/// in [0,1] under any positive weight override: parse success, every kind
/// known, every subchart carries a numeric statistic, and every statistic
/// value grounded verbatim in the input text.
inline void heuristic_prefilter(std::vector<CandidateMetadata>& candidates,
                                const std::string& input_text,
                                const HeuristicWeights& weights = {}) {
  const double total = weights.sum();
  std::vector<double> text_numbers = scan_numbers(input_text);
  for (auto& cand : candidates) {
    double score = 0.0;
    if (cand.doc) {
      score += weights.parse;
      const MetadataDoc& doc = *cand.doc;
      bool kinds_known = !doc.subcharts.empty();
      bool stats_present = !doc.subcharts.empty();
      for (const auto& sc : doc.subcharts) {
        if (sc.kind == ChartKind::unknown) kinds_known = false;
        if (sc.stats.numeric_count() == 0) stats_present = false;
      }
      if (kinds_known) score += weights.kinds;
      if (stats_present) score += weights.stats;
      bool grounded = stats_present;
      for (double v : extract_numbers(doc)) {
        bool found = false;
        for (double t : text_numbers) {
          if (std::abs(t - v) <= 1e-9) {
            found = true;
            break;
          }
        }
        if (!found) {
          grounded = false;
          break;
        }
      }
      if (grounded) score += weights.grounding;
    }
    cand.heuristic_score = total > 0 ? score / total : 0.0;
  }
}

namespace detail_rank {

inline std::optional<int> parse_option_reply(const std::string& reply) {
  static const std::regex opt_re(R"(option[^0-9]{0,3}([1-3]))", std::regex::icase);
  std::smatch m;
  if (std::regex_search(reply, m, opt_re)) return std::stoi(m[1].str());
  std::string t = trim(reply);
  if (t.size() == 1 && t[0] >= '1' && t[0] <= '3') return t[0] - '0';
  return std::nullopt;
}

}  // namespace detail_rank

/// Picks the winning candidate. With a ranker backend the top three viable
/// candidates (by heuristic score) are presented through the ranker prompt;
/// an unparseable reply or a missing backend falls back to the heuristic
/// argmax with ties broken by the lowest candidate index.
inline RankDecision rank(const std::string& input_text,
                         const std::vector<CandidateMetadata>& candidates,
                         const std::optional<RankerConfig>& ranker, Gateway& gateway,
                         const PromptCatalog* catalog = nullptr) {
  if (candidates.empty()) throw Error("ConfigError", "rank needs at least one candidate");
  std::vector<size_t> viable;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].doc) viable.push_back(i);
  }
  if (viable.empty()) throw NoViableCandidate();

  // stable order: score descending, index ascending
  std::vector<size_t> by_score = viable;
  std::stable_sort(by_score.begin(), by_score.end(), [&](size_t a, size_t b) {
    return candidates[a].heuristic_score > candidates[b].heuristic_score;
  });

  if (ranker) {
    std::vector<size_t> presented(by_score.begin(),
                                  by_score.begin() + std::min<size_t>(3, by_score.size()));
    std::map<std::string, std::string> bindings = {{"input_text", input_text}};
    for (size_t k = 0; k < 3; ++k) {
      std::string key = "option_" + std::to_string(k + 1);
      bindings[key] =
          k < presented.size() ? serialize_metadata(*candidates[presented[k]].doc) : "";
    }
    const PromptCatalog& cat = catalog ? *catalog : PromptCatalog::embedded();
    try {
      CompletionRequest req = make_request(cat, PromptId::ranker, bindings,
                                           ranker->model_id, ranker->temperature);
      Completion completion = gateway.complete(ranker->backend, req);
      if (auto option = detail_rank::parse_option_reply(completion.text)) {
        size_t k = static_cast<size_t>(*option - 1);
        if (k < presented.size()) {
          return {presented[k], RankMethod::llm_ranker, completion.text};
        }
      }
    } catch (const Error&) {
      // fall through to the heuristic
    }
  }
  return {by_score.front(), RankMethod::heuristic_fallback, ""};
}

struct StageAudit {
  struct CandidateInfo {
    std::string label;
    std::string raw_text;
    bool parsed = false;
    std::string parse_error;
    double heuristic_score = 0.0;
    bool is_valid = false;
  };
  std::vector<CandidateInfo> candidates;
  RankDecision decision;
  HeuristicWeights weights;
};

/// Stage 1 of the pipeline: candidates -> prefilter -> rank, with an audit
/// of every raw output and the decision taken.
inline std::pair<MetadataDoc, StageAudit> generate_metadata(const std::string& input_text,
                                                            const StageConfig& stage,
                                                            Gateway& gateway) {
  std::vector<CandidateMetadata> candidates =
      generate_candidates(input_text, stage.generators, gateway, stage.catalog);
  heuristic_prefilter(candidates, input_text, stage.weights);
  RankDecision decision = rank(input_text, candidates, stage.ranker, gateway, stage.catalog);

  StageAudit audit;
  audit.weights = stage.weights;
  audit.decision = decision;
  for (const auto& c : candidates) {
    audit.candidates.push_back({c.generator_label, c.raw_text, c.doc.has_value(),
                                c.parse_error, c.heuristic_score,
                                c.doc && c.validation.is_valid()});
  }
  return {*candidates[decision.chosen_index].doc, audit};
}

inline json stage_audit_to_json(const StageAudit& audit) {
  json candidates = json::array();
  for (const auto& c : audit.candidates) {
    json entry = json::object();
    entry["label"] = c.label;
    entry["raw_text"] = c.raw_text;
    entry["parsed"] = c.parsed;
    if (!c.parse_error.empty()) entry["parse_error"] = c.parse_error;
    entry["heuristic_score"] = c.heuristic_score;
    entry["is_valid"] = c.is_valid;
    candidates.push_back(std::move(entry));
  }
  return json{
      {"candidates", candidates},
      {"chosen_index", audit.decision.chosen_index},
      {"method", audit.decision.method == RankMethod::llm_ranker ? "llm_ranker"
                                                                 : "heuristic_fallback"},
      {"rationale", audit.decision.rationale_text},
      {"weights",
       {{"parse", audit.weights.parse},
        {"kinds", audit.weights.kinds},
        {"stats", audit.weights.stats},
        {"grounding", audit.weights.grounding}}},
  };
}

}  // namespace statfig
