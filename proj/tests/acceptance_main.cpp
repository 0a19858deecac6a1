// Acceptance suite: one criterion per run_criterion call, one pass/fail line
// each, nonzero exit if anything fails. Criterion 11 drives the real CLI
// binary (passed via --cli).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "statfig/codegen_loop.hpp"
#include "statfig/curation.hpp"
#include "statfig/eval.hpp"
#include "statfig/layout.hpp"
#include "statfig/metadata.hpp"
#include "statfig/pipeline.hpp"
#include "statfig/svg_render.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;
using namespace statfig;

namespace {

int g_failures = 0;
std::string g_cli_path;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      detail = msg;
    }
  }
};

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<void(Check&)>& body) {
  Check check;
  auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.require(false, std::string("exception: ") + e.what());
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0 && elapsed >= budget_seconds) {
    check.require(false, "runtime " + std::to_string(elapsed) + "s exceeds budget " +
                             std::to_string(budget_seconds) + "s");
  }
  char line[256];
  std::snprintf(line, sizeof(line), "C%02d %-28s %s (%.3fs)", number, name.c_str(),
                check.ok ? "PASS" : "FAIL", elapsed);
  std::cout << line;
  if (!check.ok) {
    std::cout << "  -- " << check.detail;
    ++g_failures;
  }
  std::cout << "\n";
}

std::vector<std::string> fixture_names() {
  return {"example1.json", "example2.json", "example3.json", "pie.json",
          "grid.json",     "line_area.json", "stacked_grouped.json", "histogram.json"};
}

int run_cli(const std::string& args) {
  std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

// --------------------------------------------------------------------------

static void criterion_metric_fixed_point(Check& check) {
  std::vector<eval::EvalPair> pairs;
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 20; ++i) {
    MetadataDoc doc = test_support::random_valid_doc(rng);
    pairs.push_back({"p" + std::to_string(i), doc, doc, false});
  }
  eval::MetricsReport r = eval::evaluate_corpus(pairs);
  check.require(r.subchart_accuracy == 100.0, "subchart accuracy not exactly 100");
  check.require(r.rse == 0.0, "rse not exactly 0");
  check.require(r.title_rouge_l == 1.0, "title rouge not exactly 1");
  check.require(r.summary_rouge_l == 1.0, "summary rouge not exactly 1");
  check.require(r.subchart_summary_rouge_l == 1.0, "subchart summary rouge not exactly 1");
  check.require(r.subchart_type_accuracy == 100.0, "type accuracy not exactly 100");
  check.require(r.statistical_accuracy == 100.0, "statistical accuracy not exactly 100");
}

static void criterion_rouge_oracle(Check& check) {
  std::mt19937_64 rng(2002);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
  std::uniform_int_distribution<size_t> len(0, 8);
  std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> cand, ref;
    std::string cand_text, ref_text;
    size_t nc = len(rng), nr = len(rng);
    for (size_t i = 0; i < nc; ++i) {
      cand.push_back(vocab[pick(rng)]);
      cand_text += cand.back() + " ";
    }
    for (size_t i = 0; i < nr; ++i) {
      ref.push_back(vocab[pick(rng)]);
      ref_text += ref.back() + " ";
    }
    double expected =
        ref.empty() ? (cand.empty() ? 1.0 : 0.0)
                    : static_cast<double>(test_support::brute_force_lcs(cand, ref)) /
                          static_cast<double>(ref.size());
    double got = eval::rouge_l(cand_text, ref_text);
    if (got != expected) {
      check.require(false, "mismatch on trial " + std::to_string(trial) + ": got " +
                               std::to_string(got) + " expected " +
                               std::to_string(expected));
      return;
    }
  }
}

static void criterion_rse_formula(Check& check) {
  MetadataDoc two, three;
  two.subcharts.resize(2);
  three.subcharts.resize(3);
  std::vector<eval::EvalPair> pairs = {{"a", two, two, false}, {"b", two, three, false}};
  double got = eval::rse(pairs);
  check.require(std::abs(got - 0.7071) <= 1e-4 && std::abs(got - std::sqrt(0.5)) <= 1e-6,
                "rse " + std::to_string(got) + " != 0.7071");
}

static void criterion_oracle_loop(Check& check) {
  for (const std::string& name : fixture_names()) {
    auto start = std::chrono::steady_clock::now();
    MetadataDoc doc = test_support::load_fixture_doc(name);
    LoopConfig cfg;  // deterministic coder + mechanical judge
    auto [ir, audit] = run_loop(doc, cfg);
    check.require(audit.terminated_by == LoopTermination::accepted, name + ": not accepted");
    check.require(audit.iterations.size() == 1, name + ": more than one iteration");
    LayoutedFigure fig = layout(ir);
    std::string svg = render_svg(fig, ir);
    size_t panels = 0, pos = 0;
    while ((pos = svg.find("<g class=\"panel\"", pos)) != std::string::npos) {
      ++panels;
      ++pos;
    }
    check.require(panels == doc.subcharts.size(), name + ": panel count mismatch");
    check.require(detect_overlaps(fig, svg).empty(), name + ": overlap violations");
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.require(elapsed < 2.0, name + ": over the 2s per-fixture budget");
  }
}

static void criterion_feedback_efficacy(Check& check) {
  MetadataDoc doc = test_support::load_fixture_doc("example1.json");
  ChartIR good = compile_metadata(doc);
  json dropped = ir_to_json(good);
  dropped["panels"].erase(dropped["panels"].size() - 1);
  std::string bad_reply = dropped.dump(2);

  LoopConfig cfg;
  cfg.coder_mode = CoderMode::llm;
  cfg.allow_deterministic_fallback = false;

  CompletionRequest req1 = make_request(
      PromptCatalog::embedded(), PromptId::coder,
      {{"metadata", serialize_metadata(doc)}, {"feedback", ""}}, cfg.coder_model,
      cfg.coder_temperature);
  ChartIR bad_ir = ir_from_json(*extract_json_object(bad_reply));
  Verdict v1 = judge_step(doc, bad_ir, JudgeMode::mechanical, cfg, nullptr);
  CompletionRequest req2 = make_request(
      PromptCatalog::embedded(), PromptId::coder,
      {{"metadata", serialize_metadata(doc)}, {"feedback", v1.feedback_text}},
      cfg.coder_model, cfg.coder_temperature);

  BackendConfig repairing;
  repairing.kind = BackendKind::scripted_mock;
  repairing.script.by_fingerprint[request_fingerprint(req1)] = bad_reply;
  repairing.script.by_fingerprint[request_fingerprint(req2)] = ir_to_json(good).dump(2);
  cfg.coder_backend = repairing;

  Gateway gw;
  auto [ir, audit] = run_loop(doc, cfg, &gw);
  check.require(audit.terminated_by == LoopTermination::accepted,
                "repairing coder not accepted");
  check.require(audit.iterations.size() == 2,
                "accepted after " + std::to_string(audit.iterations.size()) +
                    " iterations, expected 2");

  BackendConfig hopeless;
  hopeless.kind = BackendKind::scripted_mock;
  hopeless.script.by_template["coder"] = bad_reply;
  cfg.coder_backend = hopeless;
  auto [ir2, audit2] = run_loop(doc, cfg, &gw);
  check.require(audit2.terminated_by == LoopTermination::max_iterations,
                "hopeless coder did not hit the cap");
  check.require(audit2.iterations.size() == 5,
                "hopeless coder ran " + std::to_string(audit2.iterations.size()) +
                    " iterations, expected exactly 5");
}

static void criterion_spacing_bound(Check& check) {
  for (int n = 1; n <= 21; ++n) {
    MetadataDoc doc;
    doc.title = "spacing suite";
    for (int i = 0; i < n; ++i) {
      Subchart sc;
      sc.kind_raw = "bar chart";
      sc.kind = ChartKind::bar;
      sc.stats = parse_stats("alpha: 35%, beta: 63%");
      sc.axis = parse_axis("The X-axis represents item, and the Y-axis represents share");
      sc.text = "panel " + std::to_string(i + 1);
      sc.position_chart =
          i == 0 ? "the first one in the image" : "positioned below the previous subchart";
      sc.alignment = Alignment::vertical;
      doc.subcharts.push_back(std::move(sc));
    }
    ChartIR ir = compile_metadata(doc);
    LayoutedFigure fig = layout(ir);
    if (fig.rows >= 2) {
      double bound = 1.0 / (fig.rows - 1);
      check.require(fig.spacing_norm < bound,
                    std::to_string(n) + " panels: spacing " +
                        std::to_string(fig.spacing_norm) + " >= bound " +
                        std::to_string(bound));
    }
    // grid variant exercises multi-column rows
    if (n >= 3) {
      MetadataDoc grid_doc = doc;
      grid_doc.subcharts[1].position_chart = "to the right of the first chart";
      ChartIR grid_ir = compile_metadata(grid_doc);
      LayoutedFigure grid_fig = layout(grid_ir);
      if (grid_fig.rows >= 2) {
        check.require(grid_fig.spacing_norm < 1.0 / (grid_fig.rows - 1),
                      std::to_string(n) + " grid panels: spacing bound violated");
      }
    }
  }
}

static void criterion_stat_accuracy_drop(Check& check) {
  std::mt19937_64 rng(7007);
  for (int trial = 0; trial < 200; ++trial) {
    MetadataDoc gold = test_support::random_valid_doc(rng);
    std::vector<double> values = extract_numbers(gold);
    MetadataDoc pred = gold;
    double largest = values.back();
    bool removed = false;
    for (auto& sc : pred.subcharts) {
      for (auto& series : sc.stats.series) {
        for (size_t k = 0; k < series.points.size() && !removed; ++k) {
          if (series.points[k].value == largest) {
            series.points.erase(series.points.begin() + static_cast<long>(k));
            removed = true;
          }
        }
      }
    }
    double before = eval::pair_statistical_accuracy(gold, gold) * 100.0;
    double after = eval::pair_statistical_accuracy(pred, gold) * 100.0;
    double expected_drop = 100.0 / static_cast<double>(values.size());
    if (std::abs((before - after) - expected_drop) > 1e-9) {
      check.require(false, "trial " + std::to_string(trial) + ": drop " +
                               std::to_string(before - after) + " != " +
                               std::to_string(expected_drop));
      return;
    }
  }
}

static void criterion_round_trip(Check& check) {
  std::mt19937_64 rng(8008);
  for (int i = 0; i < 500; ++i) {
    MetadataDoc doc = test_support::random_valid_doc(rng);
    MetadataDoc back = parse_metadata(serialize_metadata(doc));
    if (!(back == doc)) {
      check.require(false, "round-trip mismatch on fuzzed doc " + std::to_string(i));
      return;
    }
  }
  MetadataDoc ex1 = test_support::load_fixture_doc("example1.json");
  check.require(ex1.subcharts.size() == 3, "fixture does not parse to 3 subcharts");
  std::vector<double> nums = extract_numbers(ex1);
  for (double v : {35.0, 63.0, 40.0, 59.0, 47.0, 52.0, 48.0, 51.0, 14.0, 86.0, 31.0, 67.0,
                   46.0}) {
    check.require(std::find(nums.begin(), nums.end(), v) != nums.end(),
                  "value " + format_number(v) + " missing from the parsed fixture");
  }
  check.require(std::count(nums.begin(), nums.end(), 52.0) == 2,
                "value 52 must appear twice");
}

static void criterion_leak_check(Check& check) {
  Gateway gw;
  BackendConfig clean;
  clean.kind = BackendKind::scripted_mock;
  clean.script.by_template["text_synthesis"] =
      "Respondents reported strong trust when open data was available: 57 percent said "
      "more, 8 percent said less, and 34 percent saw no difference.";
  int accepted = 0;
  for (int i = 0; i < 200; ++i) {
    curation::SourceRecord src{"rec-" + std::to_string(i), "img-" + std::to_string(i), ""};
    auto result = curation::synthesize_text(src, std::nullopt, clean, gw);
    if (!curation::leak_violations(result.text).empty()) {
      check.require(false, "accepted text for " + src.id + " contains banned tokens");
      return;
    }
    ++accepted;
  }
  check.require(accepted == 200, "expected 200 accepted texts");

  BackendConfig leaky;
  leaky.kind = BackendKind::scripted_mock;
  leaky.script.by_template["text_synthesis"] = "...as shown in the bar chart above...";
  bool flagged = false;
  try {
    curation::SourceRecord src{"leaky-record", "img-x", ""};
    curation::synthesize_text(src, std::nullopt, leaky, gw);
  } catch (const LeakCheckExhausted& e) {
    flagged = e.record_id == "leaky-record";
  }
  check.require(flagged, "leaky backend did not exhaust retries with the record flagged");
}

static void criterion_dataset_stats(Check& check) {
  std::vector<curation::DatasetRecord> records;
  for (const json& j : read_jsonl(test_support::fixture("records3.jsonl"))) {
    records.push_back(curation::record_from_json(j));
  }
  curation::DatasetStats s = curation::dataset_stats(records);
  // frozen values from an independent spreadsheet computation over the fixture
  check.require(s.n_records == 3, "n_records");
  check.require(std::abs(s.avg_words_metadata - 131.0 / 3.0) <= 1e-9, "avg words metadata");
  check.require(s.median_words_metadata == 34.0, "median words metadata");
  check.require(std::abs(s.avg_words_input - 34.0 / 3.0) <= 1e-9, "avg words input");
  check.require(s.median_words_input == 10.0, "median words input");
  check.require(std::abs(s.avg_sentences_metadata - 41.0 / 3.0) <= 1e-9,
                "avg sentences metadata");
  check.require(std::abs(s.avg_sentences_input - 4.0 / 3.0) <= 1e-9, "avg sentences input");
  check.require(std::abs(s.avg_subcharts - 4.0 / 3.0) <= 1e-9, "avg subcharts");
  check.require(s.median_subcharts == 1.0, "median subcharts");
  check.require(s.max_subcharts == 2, "max subcharts");
  check.require(s.min_subcharts == 1, "min subcharts");

  std::vector<std::string> labels;
  for (const auto& [label, _] : curation::stats_rows(s)) labels.push_back(label);
  const std::vector<std::string> expected = {
      "# of data points",
      "Avg. # of words in metadata",
      "Median # of words in metadata",
      "Avg. # of words in input text",
      "Median # of words in input text",
      "Avg. # of sentences in metadata",
      "Avg. # of sentences in input text",
      "Avg. # of sub-charts in each metadata",
      "Median # of sub-charts in each metadata",
      "Maximum # of sub-charts in each metadata",
      "Minimum # of sub-charts in each metadata",
  };
  check.require(labels == expected, "stats field set differs from the published rows");
}

static void criterion_e2e_determinism(Check& check) {
  if (g_cli_path.empty()) {
    check.require(false, "no --cli path provided");
    return;
  }
  fs::path work = fs::temp_directory_path() / "statfig_acceptance_e2e";
  fs::remove_all(work);
  fs::create_directories(work);

  std::string corpus = test_support::fixture("corpus_small.jsonl");
  std::string config = test_support::fixture("config_mock.json");
  std::string out1 = (work / "run1").string();
  std::string out2 = (work / "run2").string();

  int rc1 = run_cli("generate --corpus " + corpus + " --config " + config + " --out " +
                    out1 + " --seed 42");
  int rc2 = run_cli("generate --corpus " + corpus + " --config " + config + " --out " +
                    out2 + " --seed 42");
  check.require(rc1 == 0, "first run exited " + std::to_string(rc1));
  check.require(rc2 == 0, "second run exited " + std::to_string(rc2));
  if (rc1 != 0 || rc2 != 0) return;

  for (int d = 1; d <= 5; ++d) {
    for (const char* file : {"doc.json", "ir.json", "out.svg", "audit.json"}) {
      std::string rel = "doc" + std::to_string(d) + "/" + file;
      std::string a = read_file(out1 + "/" + rel);
      std::string b = read_file(out2 + "/" + rel);
      if (a != b) {
        check.require(false, rel + " differs between runs");
        return;
      }
    }
  }
  // manifests must agree apart from wall-clock timestamps
  json m1 = json::parse(read_file(out1 + "/manifest.json"));
  json m2 = json::parse(read_file(out2 + "/manifest.json"));
  check.require(m1["gateway_calls"]["http_attempts"] == 0, "run 1 opened the network");
  check.require(m2["gateway_calls"]["http_attempts"] == 0, "run 2 opened the network");
  m1.erase("started_at");
  m1.erase("finished_at");
  m2.erase("started_at");
  m2.erase("finished_at");
  check.require(m1 == m2, "manifests differ beyond timestamps");
}

// --------------------------------------------------------------------------

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];
  }

  run_criterion(1, "metric-fixed-point", 1.0, criterion_metric_fixed_point);
  run_criterion(2, "rouge-oracle-equivalence", 10.0, criterion_rouge_oracle);
  run_criterion(3, "rse-formula", 0, criterion_rse_formula);
  run_criterion(4, "oracle-loop", 0, criterion_oracle_loop);
  run_criterion(5, "feedback-efficacy", 0, criterion_feedback_efficacy);
  run_criterion(6, "spacing-bound", 0, criterion_spacing_bound);
  run_criterion(7, "stat-accuracy-drop", 0, criterion_stat_accuracy_drop);
  run_criterion(8, "round-trip-and-schema", 0, criterion_round_trip);
  run_criterion(9, "curation-leak-check", 0, criterion_leak_check);
  run_criterion(10, "dataset-stats", 0, criterion_dataset_stats);
  run_criterion(11, "e2e-determinism", 0, criterion_e2e_determinism);

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
