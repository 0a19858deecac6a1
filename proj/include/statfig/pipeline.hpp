#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "statfig/codegen_loop.hpp"
#include "statfig/config.hpp"
#include "statfig/curation.hpp"
#include "statfig/eval.hpp"
#include "statfig/layout.hpp"
#include "statfig/metagen.hpp"
#include "statfig/svg_render.hpp"
#include "statfig/version.hpp"

namespace statfig {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPipeline = 3;

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string command;
  json config_snapshot;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // relative to the manifest location
  std::vector<std::pair<std::string, std::string>> failures;  // id -> error
  uint64_t seed = 0;
  uint64_t gateway_total = 0;
  uint64_t gateway_mock = 0;
  uint64_t gateway_http_attempts = 0;
  std::string started_at;
  std::string finished_at;
};

inline std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  json j = json::object();
  j["command"] = m.command;
  j["version"] = std::string(kProgramName) + " " + kVersion;
  j["seed"] = m.seed;
  j["inputs"] = m.inputs;
  std::vector<std::string> outputs = m.outputs;
  std::sort(outputs.begin(), outputs.end());
  j["outputs"] = outputs;
  json failures = json::array();
  for (const auto& [id, error] : m.failures) {
    failures.push_back({{"id", id}, {"error", error}});
  }
  j["failures"] = failures;
  j["gateway_calls"] = {{"total", m.gateway_total},
                        {"mock_hits", m.gateway_mock},
                        {"http_attempts", m.gateway_http_attempts}};
  j["config"] = m.config_snapshot;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions {
  std::optional<std::string> input_file;
  std::optional<std::string> corpus;
  std::string out_dir;
  std::string config_path;
  std::optional<uint64_t> seed_override;
};

struct CorpusDoc {
  std::string id;
  std::string input_text;
};

inline std::vector<CorpusDoc> load_generate_inputs(const GenerateOptions& opts) {
  std::vector<CorpusDoc> docs;
  if (opts.input_file) {
    CorpusDoc doc;
    doc.id = fs::path(*opts.input_file).stem().string();
    doc.input_text = read_file(*opts.input_file);
    docs.push_back(std::move(doc));
  } else if (opts.corpus) {
    for (const json& j : read_jsonl(*opts.corpus)) {
      CorpusDoc doc;
      doc.id = detail::field_as_string(j, "id");
      doc.input_text = detail::field_as_string(j, "input_text");
      if (doc.id.empty()) throw Error("FileError", "corpus record without id");
      docs.push_back(std::move(doc));
    }
  } else {
    throw ConfigError("generate needs --input or --corpus");
  }
  return docs;
}

/// Full pipeline per document: metadata stage, coder/judge loop, layout and
/// SVG render. Per-document failures are isolated; the command keeps going.
inline int cmd_generate(const GenerateOptions& opts, std::ostream& log = std::cerr) {
  RunManifest manifest;
  manifest.command = "generate";
  manifest.started_at = iso_timestamp();

  PipelineConfig cfg;
  std::vector<CorpusDoc> docs;
  try {
    cfg = load_config(opts.config_path);
    if (opts.seed_override) cfg.seed = *opts.seed_override;
    if (cfg.generators.empty()) throw ConfigError("generate needs at least one generator");
    docs = load_generate_inputs(opts);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  manifest.seed = cfg.seed;
  manifest.config_snapshot = config_to_json(cfg);
  if (opts.input_file) manifest.inputs.push_back(*opts.input_file);
  if (opts.corpus) manifest.inputs.push_back(*opts.corpus);

  PromptCatalog catalog = cfg.prompt_dir.empty()
                              ? PromptCatalog::embedded()
                              : PromptCatalog::from_directory(cfg.prompt_dir);
  Gateway gateway(cfg.concurrency_limit);
  StageConfig stage = make_stage_config(cfg, &catalog);
  LoopConfig loop_cfg = make_loop_config(cfg, &catalog);

  fs::create_directories(opts.out_dir);
  const bool single = opts.input_file.has_value();

  std::mutex mu;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, std::string>> failures;

  auto process = [&](const CorpusDoc& doc) {
    try {
      auto [metadata, stage_audit] = generate_metadata(doc.input_text, stage, gateway);
      auto [ir, loop_audit] = run_loop(metadata, loop_cfg, &gateway);
      LayoutedFigure figure = layout(ir);
      std::string svg = render_svg(figure, ir);
      auto violations = detect_overlaps(figure, svg);

      fs::path dir = single ? fs::path(opts.out_dir) : fs::path(opts.out_dir) / doc.id;
      fs::create_directories(dir);
      std::string prefix = single ? "" : doc.id + "/";
      write_file((dir / "doc.json").string(), serialize_metadata(metadata));
      write_file((dir / "ir.json").string(), ir_to_json(ir).dump(2) + "\n");
      write_file((dir / "out.svg").string(), svg);
      json audit = json::object();
      audit["id"] = doc.id;
      audit["metagen"] = stage_audit_to_json(stage_audit);
      audit["loop"] = loop_audit_to_json(loop_audit);
      audit["render"] = {{"overlap_violations", violations.size()},
                         {"panels", ir.panels.size()}};
      write_file((dir / "audit.json").string(), audit.dump(2) + "\n");

      std::lock_guard<std::mutex> lock(mu);
      outputs.push_back(prefix + "doc.json");
      outputs.push_back(prefix + "ir.json");
      outputs.push_back(prefix + "out.svg");
      outputs.push_back(prefix + "audit.json");
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu);
      failures.emplace_back(doc.id, e.what());
    }
  };

  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || docs.size() <= 1) {
    for (const auto& doc : docs) process(doc);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < docs.size(); i = next.fetch_add(1)) {
          process(docs[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::sort(failures.begin(), failures.end());
  manifest.outputs = outputs;
  manifest.failures = failures;
  manifest.gateway_total = gateway.stats().total_calls.load();
  manifest.gateway_mock = gateway.stats().mock_hits.load();
  manifest.gateway_http_attempts = gateway.stats().http_attempts.load();
  manifest.finished_at = iso_timestamp();
  write_manifest(manifest, (fs::path(opts.out_dir) / "manifest.json").string());

  for (const auto& [id, error] : failures) {
    log << "document " << id << " failed: " << error << "\n";
  }
  return failures.empty() ? kExitOk : kExitPipeline;
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

/// Deterministic compile + layout + render of a metadata file; no model calls.
inline int cmd_render(const std::string& metadata_path, const std::string& out_svg,
                      std::ostream& log = std::cerr) {
  RunManifest manifest;
  manifest.command = "render";
  manifest.started_at = iso_timestamp();
  manifest.inputs.push_back(metadata_path);
  MetadataDoc doc;
  try {
    doc = parse_metadata(read_file(metadata_path));
  } catch (const Error& e) {
    log << "parse error: " << e.what() << "\n";
    return kExitConfig;
  }
  ValidationReport report = validate(doc);
  if (!report.is_valid()) {
    for (const auto& f : report.errors) {
      log << "invalid metadata: " << f.path << " [" << f.code << "] " << f.message << "\n";
    }
    return kExitConfig;
  }
  try {
    ChartIR ir = compile_metadata(doc);
    LayoutedFigure figure = layout(ir);
    write_file(out_svg, render_svg(figure, ir));
  } catch (const Error& e) {
    log << "render error: " << e.what() << "\n";
    return kExitPipeline;
  }
  manifest.outputs.push_back(fs::path(out_svg).filename().string());
  manifest.finished_at = iso_timestamp();
  write_manifest(manifest, out_svg + ".manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

/// Joins id-aligned prediction and gold corpora and runs the metric suite.
/// Unparseable predictions score as zero-subchart documents and are flagged;
/// unparseable gold is an input error.
inline int cmd_eval(const std::string& pred_path, const std::string& gold_path,
                    const std::string& out_path, bool use_fmeasure = false,
                    std::ostream& log = std::cerr, std::ostream& out = std::cout) {
  std::map<std::string, json> pred, gold;
  try {
    for (const json& j : read_jsonl(pred_path)) {
      pred[detail::field_as_string(j, "id")] = j;
    }
    for (const json& j : read_jsonl(gold_path)) {
      gold[detail::field_as_string(j, "id")] = j;
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::vector<std::string> only_pred, only_gold;
  for (const auto& [id, _] : pred) {
    if (!gold.count(id)) only_pred.push_back(id);
  }
  for (const auto& [id, _] : gold) {
    if (!pred.count(id)) only_gold.push_back(id);
  }
  if (!only_pred.empty() || !only_gold.empty()) {
    log << "id mismatch between corpora\n";
    for (const auto& id : only_pred) log << "  only in predictions: " << id << "\n";
    for (const auto& id : only_gold) log << "  only in gold: " << id << "\n";
    return kExitConfig;
  }

  auto doc_of = [](const json& j) -> MetadataDoc {
    if (j.contains("metadata") && j["metadata"].is_object()) {
      return detail::doc_from_json(j["metadata"]);
    }
    return parse_metadata(detail::field_as_string(j, "metadata"));
  };

  std::vector<eval::EvalPair> pairs;
  for (const auto& [id, gj] : gold) {
    eval::EvalPair pair;
    pair.id = id;
    try {
      pair.gold = doc_of(gj);
    } catch (const Error& e) {
      log << "gold record " << id << " does not parse: " << e.what() << "\n";
      return kExitConfig;
    }
    try {
      pair.pred = doc_of(pred.at(id));
    } catch (const Error&) {
      pair.pred = MetadataDoc{};  // zero-subchart prediction
      pair.pred_parse_failed = true;
    }
    pairs.push_back(std::move(pair));
  }

  eval::EvalOptions options;
  options.use_fmeasure = use_fmeasure;
  eval::MetricsReport report = eval::evaluate_corpus(pairs, options);
  write_file(out_path, eval::report_to_json(report).dump(2) + "\n");
  out << eval::report_to_table(report);

  RunManifest manifest;
  manifest.command = "eval";
  manifest.inputs = {pred_path, gold_path};
  manifest.outputs = {fs::path(out_path).filename().string()};
  manifest.started_at = manifest.finished_at = iso_timestamp();
  write_manifest(manifest, out_path + ".manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// curate subcommands
// ---------------------------------------------------------------------------

struct CurateContext {
  PipelineConfig cfg;
  PromptCatalog catalog;
  std::unique_ptr<Gateway> gateway;

  const BackendConfig& backend(const std::string& name) const {
    auto it = cfg.backends.find(name);
    if (it == cfg.backends.end()) throw ConfigError("unknown backend \"" + name + "\"");
    return it->second;
  }
};

inline CurateContext make_curate_context(const std::string& config_path) {
  CurateContext ctx{load_config(config_path), PromptCatalog::embedded(), nullptr};
  if (!ctx.cfg.prompt_dir.empty()) {
    ctx.catalog = PromptCatalog::from_directory(ctx.cfg.prompt_dir);
  }
  ctx.gateway = std::make_unique<Gateway>(ctx.cfg.concurrency_limit);
  return ctx;
}

inline std::vector<curation::SourceRecord> load_sources(const std::string& path) {
  std::vector<curation::SourceRecord> sources;
  for (const json& j : read_jsonl(path)) {
    curation::SourceRecord rec;
    rec.id = detail::field_as_string(j, "id");
    rec.image_ref = detail::field_as_string(j, "image_ref");
    rec.provenance = detail::field_as_string(j, "provenance");
    if (rec.id.empty() || rec.image_ref.empty()) {
      throw Error("FileError", "source record needs id and image_ref");
    }
    sources.push_back(std::move(rec));
  }
  return sources;
}

inline int cmd_curate_filter(const std::string& sources_path, const std::string& config_path,
                             const std::string& backend_name, const std::string& out_path,
                             std::ostream& log = std::cerr) {
  try {
    CurateContext ctx = make_curate_context(config_path);
    const BackendConfig& backend = ctx.backend(backend_name);
    std::vector<json> lines;
    size_t kept = 0;
    for (const auto& src : load_sources(sources_path)) {
      auto result = curation::classify_complexity(src, backend, *ctx.gateway, &ctx.catalog);
      json j = json::object();
      j["id"] = src.id;
      j["image_ref"] = src.image_ref;
      j["provenance"] = src.provenance;
      j["is_complex"] = result.is_complex;
      j["reply_parsed"] = result.reply_parsed;
      lines.push_back(std::move(j));
      if (result.is_complex) ++kept;
    }
    write_jsonl(out_path, lines);
    log << kept << " of " << lines.size() << " sources classified complex\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_curate_synth_text(const std::string& sources_path,
                                 const std::string& config_path,
                                 const std::string& backend_name,
                                 const std::string& drafts_path, const std::string& out_path,
                                 std::ostream& log = std::cerr) {
  try {
    CurateContext ctx = make_curate_context(config_path);
    const BackendConfig& backend = ctx.backend(backend_name);
    std::map<std::string, MetadataDoc> drafts;
    if (!drafts_path.empty()) {
      for (const json& j : read_jsonl(drafts_path)) {
        curation::DatasetRecord rec = curation::record_from_json(j);
        drafts[rec.id] = rec.metadata;
      }
    }
    std::vector<json> lines;
    size_t flagged = 0;
    for (const auto& src : load_sources(sources_path)) {
      json j = json::object();
      j["id"] = src.id;
      j["image_ref"] = src.image_ref;
      try {
        std::optional<MetadataDoc> metadata;
        auto it = drafts.find(src.id);
        if (it != drafts.end()) metadata = it->second;
        auto result =
            curation::synthesize_text(src, metadata, backend, *ctx.gateway, &ctx.catalog);
        j["input_text"] = result.text;
        j["attempts"] = result.attempts;
        if (metadata) {
          j["stats_covered"] = result.stats_covered;
          j["coverage"] = result.coverage;
        }
      } catch (const LeakCheckExhausted& e) {
        j["flagged"] = true;
        j["error"] = e.what();
        ++flagged;
      }
      lines.push_back(std::move(j));
    }
    write_jsonl(out_path, lines);
    if (flagged > 0) {
      log << flagged << " record(s) flagged by the leak check\n";
      return kExitPipeline;
    }
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_curate_synth_meta(const std::string& sources_path,
                                 const std::string& config_path,
                                 const std::string& backend_name,
                                 const std::string& texts_path, const std::string& out_path,
                                 std::ostream& log = std::cerr) {
  try {
    CurateContext ctx = make_curate_context(config_path);
    const BackendConfig& backend = ctx.backend(backend_name);
    std::map<std::string, std::string> texts;
    if (!texts_path.empty()) {
      for (const json& j : read_jsonl(texts_path)) {
        texts[detail::field_as_string(j, "id")] = detail::field_as_string(j, "input_text");
      }
    }
    std::vector<json> lines;
    size_t flagged = 0;
    for (const auto& src : load_sources(sources_path)) {
      auto result = curation::synthesize_metadata(src, backend, *ctx.gateway, &ctx.catalog);
      if (result.draft) {
        curation::DatasetRecord rec = *result.draft;
        auto it = texts.find(src.id);
        if (it != texts.end()) rec.input_text = it->second;
        lines.push_back(curation::record_to_json(rec));
      } else {
        json j = json::object();
        j["id"] = src.id;
        j["flagged"] = true;
        j["error"] = result.error;
        lines.push_back(std::move(j));
        ++flagged;
      }
    }
    write_jsonl(out_path, lines);
    if (flagged > 0) {
      log << flagged << " record(s) failed metadata synthesis\n";
      return kExitPipeline;
    }
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline std::vector<curation::DatasetRecord> load_records(const std::string& path) {
  std::vector<curation::DatasetRecord> records;
  for (const json& j : read_jsonl(path)) {
    if (j.value("flagged", false)) continue;
    records.push_back(curation::record_from_json(j));
  }
  return records;
}

inline int cmd_curate_export_review(const std::string& records_path,
                                    const std::string& out_path,
                                    std::ostream& log = std::cerr) {
  try {
    auto records = load_records(records_path);
    curation::review_export(records, out_path);
    log << records.size() << " record(s) exported for review\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_curate_import_review(const std::string& review_path,
                                    const std::string& originals_path,
                                    const std::string& out_path,
                                    std::optional<uint64_t> split_seed, bool strict,
                                    std::ostream& log = std::cerr) {
  try {
    std::vector<curation::DatasetRecord> originals;
    if (!originals_path.empty()) originals = load_records(originals_path);
    curation::ImportResult result = curation::review_import(review_path, originals);
    if (split_seed) {
      curation::assign_splits(result.records, *split_seed, strict);
    }
    std::vector<json> lines;
    for (const auto& rec : result.records) lines.push_back(curation::record_to_json(rec));
    write_jsonl(out_path, lines);
    for (const auto& diff : result.diffs) {
      log << "record " << diff.id << ": "
          << curation::review_status_name(diff.status_before) << " -> "
          << curation::review_status_name(diff.status_after);
      for (const auto& p : diff.changed_paths) log << " " << p;
      log << "\n";
    }
    log << result.records.size() << " record(s) imported, " << result.diffs.size()
        << " changed\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_curate_prefs(const std::string& corpus_path, const std::string& config_path,
                            const std::string& generator_backend,
                            const std::string& judge_backend, double t_low, double t_high,
                            const std::string& out_path, std::ostream& log = std::cerr) {
  try {
    CurateContext ctx = make_curate_context(config_path);
    GeneratorConfig generator;
    generator.backend = ctx.backend(generator_backend);
    generator.model_id = ctx.cfg.generators.empty() ? "generator"
                                                    : ctx.cfg.generators[0].model;
    RankerConfig judge{ctx.backend(judge_backend), "judge", 0.0};

    std::vector<json> lines;
    size_t discarded = 0;
    for (const json& j : read_jsonl(corpus_path)) {
      std::string id = detail::field_as_string(j, "id");
      std::string input_text = detail::field_as_string(j, "input_text");
      uint64_t seed = fnv1a64(std::to_string(ctx.cfg.seed) + ":" + id);
      auto outcome = curation::build_preference_pairs(input_text, generator, t_low, t_high,
                                                      judge, *ctx.gateway, seed,
                                                      &ctx.catalog);
      if (outcome.record) {
        json rec = curation::preference_to_json(*outcome.record);
        rec["id"] = id;
        lines.push_back(std::move(rec));
      } else {
        ++discarded;
        log << "pair for " << id << " discarded: " << outcome.discard_reason << "\n";
      }
    }
    write_jsonl(out_path, lines);
    log << lines.size() << " preference pair(s) written, " << discarded << " discarded\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_curate_stats(const std::string& records_path, const std::string& out_path,
                            std::ostream& log = std::cerr, std::ostream& out = std::cout) {
  try {
    auto records = load_records(records_path);
    if (records.empty()) {
      log << "error: no records\n";
      return kExitConfig;
    }
    curation::DatasetStats stats = curation::dataset_stats(records);
    if (!out_path.empty()) {
      write_file(out_path, curation::stats_to_json(stats).dump(2) + "\n");
    }
    out << curation::stats_to_table(stats);
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace statfig
