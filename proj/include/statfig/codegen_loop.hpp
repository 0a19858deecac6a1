#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "statfig/chart_ir.hpp"
#include "statfig/constraints.hpp"
#include "statfig/gateway.hpp"
#include "statfig/layout.hpp"
#include "statfig/metadata.hpp"

namespace statfig {

enum class CoderMode { llm, deterministic };
enum class JudgeMode { mechanical, llm, combined };
enum class VerdictSource { mechanical, llm, combined };

struct Verdict {
  bool accepted = false;
  std::string feedback_text;  // present iff not accepted
  ConstraintReport mechanical_report;
  VerdictSource source = VerdictSource::mechanical;
};

enum class LoopTermination { accepted, max_iterations };

struct LoopIteration {
  ChartIR ir;
  Verdict verdict;
  double duration_ms = 0;
  bool coder_fell_back = false;
  std::string note;
};

struct LoopAudit {
  std::vector<LoopIteration> iterations;
  LoopTermination terminated_by = LoopTermination::accepted;
  ChartIR final_ir;
};

struct LoopConfig {
  int max_iterations = 5;  // hard cap 5
  CoderMode coder_mode = CoderMode::deterministic;
  JudgeMode judge_mode = JudgeMode::mechanical;
  bool allow_deterministic_fallback = true;
  std::optional<BackendConfig> coder_backend;
  std::string coder_model = "coder";
  double coder_temperature = 0.5;
  std::optional<BackendConfig> judge_backend;
  std::string judge_model = "judge";
  double judge_temperature = 0.5;
  const PromptCatalog* catalog = nullptr;  // null -> embedded
};

/// "Yes" detection on judge replies: leading yes token after stripping
/// whitespace and punctuation, case-insensitive.
inline bool is_yes_reply(const std::string& reply) {
  size_t i = 0;
  while (i < reply.size() && (std::isspace(static_cast<unsigned char>(reply[i])) ||
                              std::ispunct(static_cast<unsigned char>(reply[i])))) {
    ++i;
  }
  if (i + 3 > reply.size()) return false;
  if (std::tolower(static_cast<unsigned char>(reply[i])) != 'y' ||
      std::tolower(static_cast<unsigned char>(reply[i + 1])) != 'e' ||
      std::tolower(static_cast<unsigned char>(reply[i + 2])) != 's') {
    return false;
  }
  return i + 3 == reply.size() ||
         !std::isalpha(static_cast<unsigned char>(reply[i + 3]));
}

struct CoderResult {
  ChartIR ir;
  bool fell_back = false;
  std::string note;
};

/// One coder turn. LLM mode renders the coder prompt (prior feedback bound in)
/// and parses a chart program from the reply; on any failure it falls back to
/// the deterministic compiler when allowed. Deterministic mode is the exact
/// metadata compiler.
inline CoderResult coder_step(const MetadataDoc& doc,
                              const std::optional<std::string>& prior_feedback,
                              CoderMode mode, const LoopConfig& cfg, Gateway* gateway) {
  if (mode == CoderMode::deterministic) {
    return {compile_metadata(doc), false, ""};
  }
  const PromptCatalog& catalog = cfg.catalog ? *cfg.catalog : PromptCatalog::embedded();
  std::map<std::string, std::string> bindings = {
      {"metadata", serialize_metadata(doc)},
      {"feedback", prior_feedback.value_or("")},
  };
  try {
    if (!cfg.coder_backend || !gateway) {
      throw Error("ConfigError", "no coder backend configured");
    }
    CompletionRequest req = make_request(catalog, PromptId::coder, bindings,
                                         cfg.coder_model, cfg.coder_temperature);
    Completion completion = gateway->complete(*cfg.coder_backend, req);
    auto obj = extract_json_object(completion.text);
    if (!obj) throw MalformedDocument("coder reply carries no chart program");
    return {ir_from_json(*obj), false, ""};
  } catch (const std::exception& e) {
    if (!cfg.allow_deterministic_fallback) throw;
    return {compile_metadata(doc), true,
            std::string("coder fell back to deterministic compile: ") + e.what()};
  }
}

/// One judge turn. The mechanical checklist always runs; acceptance implies
/// it passed. LLM and combined modes additionally require a yes reply, and
/// the reply text becomes feedback otherwise.
inline Verdict judge_step(const MetadataDoc& doc, const ChartIR& ir, JudgeMode mode,
                          const LoopConfig& cfg, Gateway* gateway) {
  Verdict verdict;
  verdict.source = mode == JudgeMode::mechanical ? VerdictSource::mechanical
                   : mode == JudgeMode::llm      ? VerdictSource::llm
                                                 : VerdictSource::combined;
  try {
    LayoutedFigure figure = layout(ir);
    verdict.mechanical_report = check_constraints(ir, doc, figure);
  } catch (const Error& e) {
    verdict.mechanical_report = check_constraints_unlayouted(ir, doc, e.what());
  }

  std::string mechanical_feedback;
  for (const auto& check : verdict.mechanical_report.checks) {
    if (!check.pass) {
      if (!mechanical_feedback.empty()) mechanical_feedback += " ";
      mechanical_feedback += check.id + ": " + check.detail + ".";
    }
  }

  bool llm_yes = true;
  std::string llm_feedback;
  if (mode == JudgeMode::llm || mode == JudgeMode::combined) {
    const PromptCatalog& catalog = cfg.catalog ? *cfg.catalog : PromptCatalog::embedded();
    try {
      if (!cfg.judge_backend || !gateway) {
        throw Error("ConfigError", "no judge backend configured");
      }
      CompletionRequest req = make_request(
          catalog, PromptId::judge,
          {{"metadata", serialize_metadata(doc)}, {"code", ir_to_json(ir).dump(2)}},
          cfg.judge_model, cfg.judge_temperature);
      Completion completion = gateway->complete(*cfg.judge_backend, req);
      llm_yes = is_yes_reply(completion.text);
      if (!llm_yes) llm_feedback = completion.text;
    } catch (const std::exception& e) {
      if (!cfg.allow_deterministic_fallback) throw;
      llm_yes = true;  // degrade to mechanical verdict, audited via source
      verdict.source = VerdictSource::mechanical;
      (void)e;
    }
  }

  verdict.accepted = verdict.mechanical_report.passed && llm_yes;
  if (!verdict.accepted) {
    if (mode == JudgeMode::llm && !llm_yes) {
      verdict.feedback_text = llm_feedback;
      if (!verdict.mechanical_report.passed && verdict.feedback_text.empty()) {
        verdict.feedback_text = mechanical_feedback;
      }
    } else {
      verdict.feedback_text = mechanical_feedback;
      if (!llm_yes && !llm_feedback.empty()) {
        if (!verdict.feedback_text.empty()) verdict.feedback_text += " ";
        verdict.feedback_text += llm_feedback;
      }
    }
    if (verdict.feedback_text.empty()) verdict.feedback_text = "rejected";
  }
  return verdict;
}

/// The bounded coder/judge refinement loop. Feedback from iteration k feeds
/// the coder at k+1; the loop stops on acceptance or after at most five
/// iterations, returning the iteration with the most passing checks (ties go
/// to the latest) when the cap is hit.
inline std::pair<ChartIR, LoopAudit> run_loop(const MetadataDoc& doc, const LoopConfig& cfg,
                                              Gateway* gateway = nullptr) {
  LoopAudit audit;
  int max_iterations = std::clamp(cfg.max_iterations, 1, 5);
  std::optional<std::string> feedback;
  for (int k = 0; k < max_iterations; ++k) {
    auto started = std::chrono::steady_clock::now();
    CoderResult coded = coder_step(doc, feedback, cfg.coder_mode, cfg, gateway);
    Verdict verdict = judge_step(doc, coded.ir, cfg.judge_mode, cfg, gateway);
    double elapsed = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    audit.iterations.push_back(
        {coded.ir, verdict, elapsed, coded.fell_back, coded.note});
    if (verdict.accepted) {
      audit.terminated_by = LoopTermination::accepted;
      audit.final_ir = coded.ir;
      return {audit.final_ir, audit};
    }
    feedback = verdict.feedback_text;
  }
  size_t best = 0;
  for (size_t i = 1; i < audit.iterations.size(); ++i) {
    if (audit.iterations[i].verdict.mechanical_report.passing_count() >=
        audit.iterations[best].verdict.mechanical_report.passing_count()) {
      best = i;
    }
  }
  audit.terminated_by = LoopTermination::max_iterations;
  audit.final_ir = audit.iterations[best].ir;
  return {audit.final_ir, audit};
}

/// Persisted audit form. Wall-clock durations are not written; repeated runs
/// with the same inputs must produce identical files.
inline json loop_audit_to_json(const LoopAudit& audit) {
  json iterations = json::array();
  for (const auto& it : audit.iterations) {
    json v = json::object();
    v["accepted"] = it.verdict.accepted;
    if (!it.verdict.accepted) v["feedback"] = it.verdict.feedback_text;
    v["source"] = it.verdict.source == VerdictSource::mechanical ? "mechanical"
                  : it.verdict.source == VerdictSource::llm      ? "llm"
                                                                 : "combined";
    v["checks"] = constraint_report_to_json(it.verdict.mechanical_report);
    json entry = json::object();
    entry["ir"] = ir_to_json(it.ir);
    entry["verdict"] = v;
    if (it.coder_fell_back) entry["coder_fell_back"] = true;
    if (!it.note.empty()) entry["note"] = it.note;
    iterations.push_back(std::move(entry));
  }
  return json{
      {"iterations", iterations},
      {"terminated_by", audit.terminated_by == LoopTermination::accepted
                            ? "accepted"
                            : "max_iterations"},
  };
}

}  // namespace statfig
