#include <catch2/catch_amalgamated.hpp>

#include "statfig/metagen.hpp"
#include "support/test_support.hpp"

using namespace statfig;
using test_support::load_fixture_doc;

namespace {

BackendConfig mock_backend(MockScript script) {
  BackendConfig b;
  b.kind = BackendKind::scripted_mock;
  b.script = std::move(script);
  return b;
}

BackendConfig down_backend() {
  BackendConfig b;
  b.kind = BackendKind::http_chat;
  b.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  b.max_attempts = 1;
  b.timeout_ms = 300;
  return b;
}

GeneratorConfig generator(const std::string& label, BackendConfig backend,
                          double temperature = 0.5) {
  GeneratorConfig g;
  g.backend = std::move(backend);
  g.model_id = "gen-model";
  g.temperature = temperature;
  g.label = label;
  return g;
}

const std::string kGoldText = [] {
  return serialize_metadata(test_support::load_fixture_doc("example1.json"));
}();

// an input text carrying every number from the gold metadata
const std::string kGroundedInput =
    "Respondents split 35 to 63 overall; Republicans by knowledge ran 40/59, 47/52 and "
    "48/51, while Democrats ran 14/86, 31/67 and 46/52.";

}  // namespace

TEST_CASE("one candidate per config, failures recorded but never dropped") {
  MockScript good;
  good.by_template["metadata_synthesis"] = kGoldText;
  MockScript two_pane;
  two_pane.by_template["metadata_synthesis"] =
      serialize_metadata(load_fixture_doc("example2.json"));
  MockScript garbage;
  garbage.by_template["metadata_synthesis"] = "no object here at all";

  std::vector<GeneratorConfig> configs = {
      generator("a", mock_backend(good)),
      generator("b", mock_backend(two_pane)),
      generator("c", mock_backend(garbage)),
  };
  Gateway gw;
  auto candidates = generate_candidates("text", configs, gw);
  REQUIRE(candidates.size() == 3);
  REQUIRE(candidates[0].generator_label == "a");
  REQUIRE(candidates[0].doc.has_value());
  REQUIRE(candidates[1].doc.has_value());
  REQUIRE_FALSE(candidates[2].doc.has_value());
  REQUIRE_FALSE(candidates[2].parse_error.empty());
}

TEST_CASE("single gold generator yields a valid candidate") {
  MockScript good;
  good.by_template["metadata_synthesis"] = kGoldText;
  Gateway gw;
  auto candidates = generate_candidates("text", {generator("solo", mock_backend(good))}, gw);
  REQUIRE(candidates.size() == 1);
  REQUIRE(candidates[0].doc.has_value());
  REQUIRE(candidates[0].validation.is_valid());
}

TEST_CASE("all backends down raises AllBackendsFailed") {
  Gateway gw;
  std::vector<GeneratorConfig> configs = {generator("x", down_backend()),
                                          generator("y", down_backend())};
  REQUIRE_THROWS_AS(generate_candidates("text", configs, gw), AllBackendsFailed);
}

TEST_CASE("heuristic scores follow the weighted signals") {
  auto make_candidate = [&](const std::string& reply) {
    CandidateMetadata c;
    c.raw_text = reply;
    try {
      c.doc = parse_metadata(reply);
      c.validation = validate(*c.doc);
    } catch (const Error& e) {
      c.parse_error = e.what();
    }
    return c;
  };

  SECTION("gold candidate grounded in the text scores 1.0") {
    std::vector<CandidateMetadata> cands = {make_candidate(kGoldText)};
    heuristic_prefilter(cands, kGroundedInput);
    REQUIRE(cands[0].heuristic_score == Catch::Approx(1.0));
  }
  SECTION("unparseable candidate scores 0.0") {
    std::vector<CandidateMetadata> cands = {make_candidate("just words")};
    heuristic_prefilter(cands, kGroundedInput);
    REQUIRE(cands[0].heuristic_score == 0.0);
  }
  SECTION("one ungrounded value drops exactly the grounding weight") {
    MetadataDoc doc = load_fixture_doc("example1.json");
    doc.subcharts[0].stats = parse_stats(
        "Can be used to produce any conclusion the researcher wants: 99%, and Generally "
        "produces accurate conclusions: 63%");
    std::vector<CandidateMetadata> cands = {make_candidate(serialize_metadata(doc))};
    heuristic_prefilter(cands, kGroundedInput);
    REQUIRE(cands[0].heuristic_score == Catch::Approx(0.8));
  }
  SECTION("scores are invariant under weight scaling") {
    std::vector<CandidateMetadata> a = {make_candidate(kGoldText),
                                        make_candidate("unparseable")};
    std::vector<CandidateMetadata> b = a;
    HeuristicWeights w;
    heuristic_prefilter(a, kGroundedInput, w);
    HeuristicWeights scaled{w.parse * 3, w.kinds * 3, w.stats * 3, w.grounding * 3};
    heuristic_prefilter(b, kGroundedInput, scaled);
    for (size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].heuristic_score == Catch::Approx(b[i].heuristic_score));
    }
  }
  SECTION("adding a signal never lowers the score") {
    MetadataDoc ungrounded = load_fixture_doc("example1.json");
    ungrounded.subcharts[0].stats = parse_stats("a: 77777");
    std::vector<CandidateMetadata> cands = {make_candidate(serialize_metadata(ungrounded)),
                                            make_candidate(kGoldText)};
    heuristic_prefilter(cands, kGroundedInput);
    REQUIRE(cands[1].heuristic_score >= cands[0].heuristic_score);
  }
}

TEST_CASE("rank parses Option replies and falls back on anything else") {
  MockScript good;
  good.by_template["metadata_synthesis"] = kGoldText;
  Gateway gw;
  std::vector<GeneratorConfig> configs = {generator("a", mock_backend(good)),
                                          generator("b", mock_backend(good)),
                                          generator("c", mock_backend(good))};
  auto candidates = generate_candidates("t", configs, gw);
  heuristic_prefilter(candidates, "t");

  SECTION("Option 2 chooses the second presented candidate") {
    MockScript ranker_script;
    ranker_script.by_template["ranker"] = "Option 2";
    RankerConfig ranker{mock_backend(ranker_script), "ranker-model", 0.0};
    RankDecision d = rank("t", candidates, ranker, gw);
    REQUIRE(d.method == RankMethod::llm_ranker);
    REQUIRE(d.chosen_index == 1);
  }
  SECTION("free-text reply without an option falls back to the heuristic") {
    MockScript ranker_script;
    ranker_script.by_template["ranker"] = "the best is clearly the 3rd";
    RankerConfig ranker{mock_backend(ranker_script), "ranker-model", 0.0};
    RankDecision d = rank("t", candidates, ranker, gw);
    REQUIRE(d.method == RankMethod::heuristic_fallback);
  }
  SECTION("no ranker backend uses argmax with lowest-index ties") {
    candidates[0].heuristic_score = 0.8;
    candidates[1].heuristic_score = 0.8;
    candidates[2].heuristic_score = 0.4;
    RankDecision d = rank("t", candidates, std::nullopt, gw);
    REQUIRE(d.method == RankMethod::heuristic_fallback);
    REQUIRE(d.chosen_index == 0);
  }
  SECTION("no viable candidate raises") {
    std::vector<CandidateMetadata> unparsed(2);
    unparsed[0].raw_text = "x";
    unparsed[1].raw_text = "y";
    REQUIRE_THROWS_AS(rank("t", unparsed, std::nullopt, gw), NoViableCandidate);
  }
}

TEST_CASE("stage composition returns a candidate, never an invention") {
  MockScript gold;
  gold.by_template["metadata_synthesis"] = kGoldText;
  MockScript corrupt;
  corrupt.by_template["metadata_synthesis"] = "garbage {{{";

  StageConfig stage;
  stage.generators = {generator("gold", mock_backend(gold)),
                      generator("bad1", mock_backend(corrupt)),
                      generator("bad2", mock_backend(corrupt))};
  Gateway gw;
  auto [doc, audit] = generate_metadata(kGroundedInput, stage, gw);
  REQUIRE(doc == load_fixture_doc("example1.json"));
  REQUIRE(audit.candidates.size() == 3);
  REQUIRE(audit.decision.chosen_index == 0);
  // selection soundness: the returned doc equals one of the raw candidates
  bool found = false;
  for (const auto& c : audit.candidates) {
    if (c.parsed && c.raw_text == kGoldText) found = true;
  }
  REQUIRE(found);
}

TEST_CASE("stage with only prose-emitting generators raises NoViableCandidate") {
  MockScript prose;
  prose.by_template["metadata_synthesis"] = "there is no structured object here";
  StageConfig stage;
  stage.generators = {generator("a", mock_backend(prose)),
                      generator("b", mock_backend(prose))};
  Gateway gw;
  REQUIRE_THROWS_AS(generate_metadata("text", stage, gw), NoViableCandidate);
}

TEST_CASE("stage audit is byte-stable across runs") {
  MockScript gold;
  gold.by_template["metadata_synthesis"] = kGoldText;
  StageConfig stage;
  stage.generators = {generator("solo", mock_backend(gold))};
  Gateway gw;
  auto first = generate_metadata(kGroundedInput, stage, gw);
  auto second = generate_metadata(kGroundedInput, stage, gw);
  REQUIRE(stage_audit_to_json(first.second).dump() ==
          stage_audit_to_json(second.second).dump());
  REQUIRE(first.first == second.first);
}

TEST_CASE("more than three candidates presents the heuristic top three") {
  MockScript gold;
  gold.by_template["metadata_synthesis"] = kGoldText;
  MockScript corrupt;
  corrupt.by_template["metadata_synthesis"] = "garbage";
  Gateway gw;

  std::vector<GeneratorConfig> configs = {
      generator("g1", mock_backend(corrupt)), generator("g2", mock_backend(gold)),
      generator("g3", mock_backend(gold)), generator("g4", mock_backend(gold)),
      generator("g5", mock_backend(gold))};
  auto candidates = generate_candidates(kGroundedInput, configs, gw);
  heuristic_prefilter(candidates, kGroundedInput);

  MockScript ranker_script;
  ranker_script.by_template["ranker"] = "Option 1";
  RankerConfig ranker{mock_backend(ranker_script), "r", 0.0};
  RankDecision d = rank(kGroundedInput, candidates, ranker, gw);
  REQUIRE(d.method == RankMethod::llm_ranker);
  // option 1 is the best viable candidate, which is index 1 (first parseable)
  REQUIRE(d.chosen_index == 1);
}
