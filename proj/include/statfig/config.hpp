#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "statfig/codegen_loop.hpp"
#include "statfig/errors.hpp"
#include "statfig/gateway.hpp"
#include "statfig/jsonio.hpp"
#include "statfig/metagen.hpp"

namespace statfig {

struct GeneratorSpec {
  std::string backend;
  std::string model;
  double temperature = 0.5;
  std::string label;
};

struct RankerSpec {
  std::string backend;
  std::string model;
  double temperature = 0.0;
};

struct LoopSpec {
  int max_iterations = 5;
  std::string coder_mode = "deterministic";  // deterministic | llm
  std::string judge_mode = "mechanical";     // mechanical | llm | combined
  bool allow_deterministic_fallback = true;
  std::string coder_backend;
  std::string coder_model = "coder";
  double coder_temperature = 0.5;
  std::string judge_backend;
  std::string judge_model = "judge";
  double judge_temperature = 0.5;
};

struct PipelineConfig {
  uint64_t seed = 0;
  int jobs = 1;
  int concurrency_limit = 4;
  std::string prompt_dir;  // empty -> embedded catalog
  std::map<std::string, BackendConfig> backends;
  std::vector<GeneratorSpec> generators;
  std::optional<RankerSpec> ranker;
  HeuristicWeights weights;
  LoopSpec loop;
};

namespace detail_config {

inline BackendConfig backend_from_json(const std::string& name, const json& j,
                                       const std::filesystem::path& base_dir) {
  BackendConfig b;
  b.name = name;
  std::string kind = j.value("kind", "");
  if (kind == "http_chat") {
    b.kind = BackendKind::http_chat;
  } else if (kind == "scripted_mock") {
    b.kind = BackendKind::scripted_mock;
  } else {
    throw ConfigError("backend \"" + name + "\": kind must be http_chat or scripted_mock");
  }
  b.endpoint = j.value("endpoint", "");
  b.auth_env = j.value("auth_env", "");
  b.max_attempts = j.value("max_attempts", 1);
  b.timeout_ms = j.value("timeout_ms", 30000);
  if (j.contains("backoff_ms") && j["backoff_ms"].is_array()) {
    for (const auto& v : j["backoff_ms"]) b.backoff_ms.push_back(v.get<int>());
  }
  if (b.kind == BackendKind::http_chat && b.endpoint.empty()) {
    throw ConfigError("backend \"" + name + "\": http_chat requires endpoint");
  }
  json script;
  if (j.contains("script_file")) {
    std::filesystem::path p = j["script_file"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    script = json::parse(read_file(p.string()));
  } else if (j.contains("script")) {
    script = j["script"];
  }
  if (!script.is_null()) {
    if (script.contains("by_fingerprint") && script["by_fingerprint"].is_object()) {
      for (const auto& [fp, text] : script["by_fingerprint"].items()) {
        b.script.by_fingerprint[fp] = text.get<std::string>();
      }
    }
    if (script.contains("by_template") && script["by_template"].is_object()) {
      for (const auto& [tpl, text] : script["by_template"].items()) {
        b.script.by_template[tpl] = text.get<std::string>();
      }
    }
  }
  if (b.kind == BackendKind::scripted_mock && b.script.by_fingerprint.empty() &&
      b.script.by_template.empty()) {
    throw ConfigError("backend \"" + name + "\": scripted_mock requires a script");
  }
  return b;
}

}  // namespace detail_config

inline PipelineConfig load_config(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError(path + " is not a JSON object");
  }
  static const std::vector<std::string> known = {
      "seed",       "jobs",   "concurrency_limit", "prompt_dir",
      "backends",   "generators", "ranker",        "heuristics",
      "loop",
  };
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key \"" + key + "\"");
    }
  }
  std::filesystem::path base_dir = std::filesystem::path(path).parent_path();

  PipelineConfig cfg;
  cfg.seed = j.value("seed", 0ull);
  cfg.jobs = j.value("jobs", 1);
  cfg.concurrency_limit = j.value("concurrency_limit", 4);
  cfg.prompt_dir = j.value("prompt_dir", std::string());
  if (!cfg.prompt_dir.empty()) {
    std::filesystem::path p = cfg.prompt_dir;
    if (p.is_relative()) cfg.prompt_dir = (base_dir / p).string();
  }
  if (j.contains("backends")) {
    for (const auto& [name, spec] : j["backends"].items()) {
      cfg.backends[name] = detail_config::backend_from_json(name, spec, base_dir);
    }
  }
  if (j.contains("generators")) {
    for (const auto& g : j["generators"]) {
      GeneratorSpec spec;
      spec.backend = g.value("backend", "");
      spec.model = g.value("model", "generator");
      spec.temperature = g.value("temperature", 0.5);
      spec.label = g.value("label", spec.model);
      if (!cfg.backends.count(spec.backend)) {
        throw ConfigError("generator references unknown backend \"" + spec.backend + "\"");
      }
      cfg.generators.push_back(std::move(spec));
    }
  }
  if (j.contains("ranker") && !j["ranker"].is_null()) {
    RankerSpec spec;
    spec.backend = j["ranker"].value("backend", "");
    spec.model = j["ranker"].value("model", "ranker");
    spec.temperature = j["ranker"].value("temperature", 0.0);
    if (!cfg.backends.count(spec.backend)) {
      throw ConfigError("ranker references unknown backend \"" + spec.backend + "\"");
    }
    cfg.ranker = spec;
  }
  if (j.contains("heuristics")) {
    const json& h = j["heuristics"];
    cfg.weights.parse = h.value("parse", cfg.weights.parse);
    cfg.weights.kinds = h.value("kinds", cfg.weights.kinds);
    cfg.weights.stats = h.value("stats", cfg.weights.stats);
    cfg.weights.grounding = h.value("grounding", cfg.weights.grounding);
  }
  if (j.contains("loop")) {
    const json& l = j["loop"];
    cfg.loop.max_iterations = l.value("max_iterations", 5);
    if (cfg.loop.max_iterations < 1 || cfg.loop.max_iterations > 5) {
      throw ConfigError("loop.max_iterations must be in [1,5]");
    }
    cfg.loop.coder_mode = l.value("coder_mode", cfg.loop.coder_mode);
    cfg.loop.judge_mode = l.value("judge_mode", cfg.loop.judge_mode);
    cfg.loop.allow_deterministic_fallback =
        l.value("allow_deterministic_fallback", true);
    cfg.loop.coder_backend = l.value("coder_backend", std::string());
    cfg.loop.coder_model = l.value("coder_model", cfg.loop.coder_model);
    cfg.loop.coder_temperature = l.value("coder_temperature", 0.5);
    cfg.loop.judge_backend = l.value("judge_backend", std::string());
    cfg.loop.judge_model = l.value("judge_model", cfg.loop.judge_model);
    cfg.loop.judge_temperature = l.value("judge_temperature", 0.5);
    if (cfg.loop.coder_mode != "deterministic" && cfg.loop.coder_mode != "llm") {
      throw ConfigError("loop.coder_mode must be deterministic or llm");
    }
    if (cfg.loop.judge_mode != "mechanical" && cfg.loop.judge_mode != "llm" &&
        cfg.loop.judge_mode != "combined") {
      throw ConfigError("loop.judge_mode must be mechanical, llm or combined");
    }
    if (!cfg.loop.coder_backend.empty() && !cfg.backends.count(cfg.loop.coder_backend)) {
      throw ConfigError("loop.coder_backend references unknown backend");
    }
    if (!cfg.loop.judge_backend.empty() && !cfg.backends.count(cfg.loop.judge_backend)) {
      throw ConfigError("loop.judge_backend references unknown backend");
    }
  }
  return cfg;
}

/// Resolved configuration snapshot (defaults filled in); also what
/// --print-config emits. Mock scripts are summarized, credentials are only
/// ever environment-variable names.
inline json config_to_json(const PipelineConfig& cfg) {
  json backends = json::object();
  for (const auto& [name, b] : cfg.backends) {
    json bj = json::object();
    bj["kind"] = b.kind == BackendKind::http_chat ? "http_chat" : "scripted_mock";
    if (!b.endpoint.empty()) bj["endpoint"] = b.endpoint;
    if (!b.auth_env.empty()) bj["auth_env"] = b.auth_env;
    bj["max_attempts"] = b.max_attempts;
    bj["timeout_ms"] = b.timeout_ms;
    bj["backoff_ms"] = b.backoff_ms;
    if (b.kind == BackendKind::scripted_mock) {
      bj["script_entries"] = b.script.by_fingerprint.size();
      json tpls = json::array();
      for (const auto& [tpl, _] : b.script.by_template) tpls.push_back(tpl);
      bj["script_templates"] = tpls;
    }
    backends[name] = bj;
  }
  json generators = json::array();
  for (const auto& g : cfg.generators) {
    generators.push_back({{"backend", g.backend},
                          {"model", g.model},
                          {"temperature", g.temperature},
                          {"label", g.label}});
  }
  json ranker;
  if (cfg.ranker) {
    ranker = {{"backend", cfg.ranker->backend},
              {"model", cfg.ranker->model},
              {"temperature", cfg.ranker->temperature}};
  }
  return json{
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"concurrency_limit", cfg.concurrency_limit},
      {"prompt_dir", cfg.prompt_dir},
      {"backends", backends},
      {"generators", generators},
      {"ranker", ranker},
      {"heuristics",
       {{"parse", cfg.weights.parse},
        {"kinds", cfg.weights.kinds},
        {"stats", cfg.weights.stats},
        {"grounding", cfg.weights.grounding}}},
      {"loop",
       {{"max_iterations", cfg.loop.max_iterations},
        {"coder_mode", cfg.loop.coder_mode},
        {"judge_mode", cfg.loop.judge_mode},
        {"allow_deterministic_fallback", cfg.loop.allow_deterministic_fallback},
        {"coder_backend", cfg.loop.coder_backend},
        {"coder_model", cfg.loop.coder_model},
        {"coder_temperature", cfg.loop.coder_temperature},
        {"judge_backend", cfg.loop.judge_backend},
        {"judge_model", cfg.loop.judge_model},
        {"judge_temperature", cfg.loop.judge_temperature}}},
  };
}

inline StageConfig make_stage_config(const PipelineConfig& cfg,
                                     const PromptCatalog* catalog) {
  StageConfig stage;
  for (const auto& g : cfg.generators) {
    GeneratorConfig gen;
    gen.backend = cfg.backends.at(g.backend);
    gen.model_id = g.model;
    gen.temperature = g.temperature;
    gen.label = g.label;
    stage.generators.push_back(std::move(gen));
  }
  if (cfg.ranker) {
    stage.ranker = RankerConfig{cfg.backends.at(cfg.ranker->backend), cfg.ranker->model,
                                cfg.ranker->temperature};
  }
  stage.weights = cfg.weights;
  stage.catalog = catalog;
  return stage;
}

inline LoopConfig make_loop_config(const PipelineConfig& cfg,
                                   const PromptCatalog* catalog) {
  LoopConfig loop;
  loop.max_iterations = cfg.loop.max_iterations;
  loop.coder_mode =
      cfg.loop.coder_mode == "llm" ? CoderMode::llm : CoderMode::deterministic;
  loop.judge_mode = cfg.loop.judge_mode == "llm"        ? JudgeMode::llm
                    : cfg.loop.judge_mode == "combined" ? JudgeMode::combined
                                                        : JudgeMode::mechanical;
  loop.allow_deterministic_fallback = cfg.loop.allow_deterministic_fallback;
  if (!cfg.loop.coder_backend.empty()) {
    loop.coder_backend = cfg.backends.at(cfg.loop.coder_backend);
  }
  loop.coder_model = cfg.loop.coder_model;
  loop.coder_temperature = cfg.loop.coder_temperature;
  if (!cfg.loop.judge_backend.empty()) {
    loop.judge_backend = cfg.backends.at(cfg.loop.judge_backend);
  }
  loop.judge_model = cfg.loop.judge_model;
  loop.judge_temperature = cfg.loop.judge_temperature;
  loop.catalog = catalog;
  return loop;
}

}  // namespace statfig
