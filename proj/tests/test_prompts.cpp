#include <catch2/catch_amalgamated.hpp>

#include "statfig/jsonio.hpp"
#include "statfig/prompts.hpp"
#include "support/test_support.hpp"

using namespace statfig;

TEST_CASE("shipped prompt files match the embedded catalog byte for byte") {
  const PromptCatalog& embedded = PromptCatalog::embedded();
  for (PromptId id : kAllPromptIds) {
    std::string path = test_support::prompt_dir() + "/" + prompt_id_name(id) + ".txt";
    INFO(path);
    REQUIRE(read_file(path) == embedded.get(id).body);
  }
}

TEST_CASE("required bindings are derived from the placeholders") {
  const auto& ranker = PromptCatalog::embedded().get(PromptId::ranker);
  REQUIRE(ranker.required_bindings ==
          std::set<std::string>{"input_text", "option_1", "option_2", "option_3"});
  const auto& judge = PromptCatalog::embedded().get(PromptId::judge);
  REQUIRE(judge.required_bindings == std::set<std::string>{"metadata", "code"});
  const auto& coder = PromptCatalog::embedded().get(PromptId::coder);
  REQUIRE(coder.required_bindings == std::set<std::string>{"metadata", "feedback"});
  // literal JSON braces in the template bodies never count as placeholders
  REQUIRE(ranker.body.find("\"subchart_1\"") != std::string::npos);
}

TEST_CASE("ranker render carries all three options verbatim") {
  std::string out = render_prompt(PromptId::ranker, {{"input_text", "THE TEXT"},
                                                     {"option_1", "OPT-A"},
                                                     {"option_2", "OPT-B"},
                                                     {"option_3", "OPT-C"}});
  REQUIRE(out.find("THE TEXT") != std::string::npos);
  REQUIRE(out.find("OPT-A") != std::string::npos);
  REQUIRE(out.find("OPT-B") != std::string::npos);
  REQUIRE(out.find("OPT-C") != std::string::npos);
  REQUIRE(out.find("{input_text}") == std::string::npos);
}

TEST_CASE("coder render carries the serialized metadata once") {
  std::string payload = "SERIALIZED-METADATA-BLOB";
  std::string out =
      render_prompt(PromptId::coder, {{"metadata", payload}, {"feedback", ""}});
  size_t first = out.find(payload);
  REQUIRE(first != std::string::npos);
  REQUIRE(out.find(payload, first + 1) == std::string::npos);
}

TEST_CASE("missing bindings are rejected by name") {
  try {
    render_prompt(PromptId::judge, {{"metadata", "m"}});
    FAIL("expected MissingBinding");
  } catch (const MissingBinding& e) {
    REQUIRE(e.name == "code");
  }
}

TEST_CASE("rendering is byte-stable and ignores extra bindings") {
  std::map<std::string, std::string> bindings = {
      {"metadata", "m"}, {"feedback", "f"}, {"unused_extra", "zzz"}};
  std::string a = render_prompt(PromptId::coder, bindings);
  std::string b = render_prompt(PromptId::coder, bindings);
  REQUIRE(a == b);
  REQUIRE(a.find("zzz") == std::string::npos);
}

TEST_CASE("catalog loads overrides from a directory") {
  PromptCatalog from_dir = PromptCatalog::from_directory(test_support::prompt_dir());
  for (PromptId id : kAllPromptIds) {
    REQUIRE(from_dir.get(id).body == PromptCatalog::embedded().get(id).body);
  }
  // missing directory falls back to embedded bodies
  PromptCatalog missing = PromptCatalog::from_directory("/nonexistent/prompts");
  REQUIRE(missing.get(PromptId::ranker).body ==
          PromptCatalog::embedded().get(PromptId::ranker).body);
}
