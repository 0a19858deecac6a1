#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "statfig/pipeline.hpp"
#include "statfig/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"text-to-statistical-infographic pipeline"};
  app.set_version_flag("--version", std::string(statfig::kProgramName) + " " +
                                        statfig::kVersion);
  app.require_subcommand(0, 1);

  std::string root_config;
  bool print_config = false;
  app.add_option("--config", root_config, "pipeline config file");
  app.add_flag("--print-config", print_config, "print the resolved config and exit");

  // generate
  auto* generate = app.add_subcommand("generate", "run the full text-to-SVG pipeline");
  std::string gen_input, gen_corpus, gen_config, gen_out;
  std::optional<uint64_t> gen_seed;
  generate->add_option("--input", gen_input, "single input text file");
  generate->add_option("--corpus", gen_corpus, "JSONL corpus of {id, input_text}");
  generate->add_option("--config", gen_config, "pipeline config file")->required();
  generate->add_option("--out", gen_out, "output directory")->required();
  generate->add_option("--seed", gen_seed, "override the config seed");

  // render
  auto* render = app.add_subcommand("render", "compile a metadata file to SVG");
  std::string render_metadata, render_out;
  render->add_option("--metadata", render_metadata, "metadata file (JSON or prose)")
      ->required();
  render->add_option("--out", render_out, "output SVG path")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold metadata");
  std::string eval_pred, eval_gold, eval_out;
  bool eval_fmeasure = false;
  eval_cmd->add_option("--pred", eval_pred, "JSONL of {id, metadata}")->required();
  eval_cmd->add_option("--gold", eval_gold, "JSONL of {id, metadata}")->required();
  eval_cmd->add_option("--out", eval_out, "report JSON path")->required();
  eval_cmd->add_flag("--fmeasure", eval_fmeasure, "use the F1 ROUGE-L variant");

  // curate
  auto* curate = app.add_subcommand("curate", "dataset curation tools");
  curate->require_subcommand(1);

  auto* filter = curate->add_subcommand("filter", "complexity-filter source records");
  std::string f_sources, f_config, f_backend = "classifier", f_out;
  filter->add_option("--sources", f_sources, "JSONL of {id, image_ref}")->required();
  filter->add_option("--config", f_config, "pipeline config")->required();
  filter->add_option("--backend", f_backend, "backend name");
  filter->add_option("--out", f_out, "output JSONL")->required();

  auto* synth_text = curate->add_subcommand("synth-text", "synthesize leak-free input text");
  std::string st_sources, st_config, st_backend = "describer", st_drafts, st_out;
  synth_text->add_option("--sources", st_sources, "JSONL of {id, image_ref}")->required();
  synth_text->add_option("--config", st_config, "pipeline config")->required();
  synth_text->add_option("--backend", st_backend, "backend name");
  synth_text->add_option("--drafts", st_drafts, "draft records for coverage checks");
  synth_text->add_option("--out", st_out, "output JSONL")->required();

  auto* synth_meta = curate->add_subcommand("synth-meta", "synthesize metadata drafts");
  std::string sm_sources, sm_config, sm_backend = "synthesizer", sm_texts, sm_out;
  synth_meta->add_option("--sources", sm_sources, "JSONL of {id, image_ref}")->required();
  synth_meta->add_option("--config", sm_config, "pipeline config")->required();
  synth_meta->add_option("--backend", sm_backend, "backend name");
  synth_meta->add_option("--texts", sm_texts, "synthesized texts to merge by id");
  synth_meta->add_option("--out", sm_out, "output JSONL")->required();

  auto* export_review = curate->add_subcommand("export-review", "export records for review");
  std::string er_records, er_out;
  export_review->add_option("--records", er_records, "records JSONL")->required();
  export_review->add_option("--out", er_out, "review JSONL")->required();

  auto* import_review = curate->add_subcommand("import-review", "import reviewed records");
  std::string ir_file, ir_originals, ir_out;
  std::optional<uint64_t> ir_split_seed;
  bool ir_strict = false;
  import_review->add_option("--file", ir_file, "edited review JSONL")->required();
  import_review->add_option("--records", ir_originals, "original records for the diff");
  import_review->add_option("--out", ir_out, "output records JSONL")->required();
  import_review->add_option("--split-seed", ir_split_seed,
                            "assign train/val/test splits with this seed");
  import_review->add_flag("--strict", ir_strict,
                          "unreviewed records get no split assignment");

  auto* prefs = curate->add_subcommand("prefs", "build preference pairs");
  std::string p_corpus, p_config, p_generator = "generator", p_judge = "judge", p_out;
  double p_tlow = 0.2, p_thigh = 0.9;
  prefs->add_option("--corpus", p_corpus, "JSONL of {id, input_text}")->required();
  prefs->add_option("--config", p_config, "pipeline config")->required();
  prefs->add_option("--generator-backend", p_generator, "generation backend name");
  prefs->add_option("--judge-backend", p_judge, "judge backend name");
  prefs->add_option("--t-low", p_tlow, "first sampling temperature");
  prefs->add_option("--t-high", p_thigh, "second sampling temperature");
  prefs->add_option("--out", p_out, "output JSONL")->required();

  auto* stats = curate->add_subcommand("stats", "dataset statistics");
  std::string s_records, s_out;
  stats->add_option("--records", s_records, "records JSONL")->required();
  stats->add_option("--out", s_out, "stats JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_config) {
      if (root_config.empty()) {
        std::cerr << "error: --print-config needs --config\n";
        return statfig::kExitConfig;
      }
      statfig::PipelineConfig cfg = statfig::load_config(root_config);
      std::cout << statfig::config_to_json(cfg).dump(2) << "\n";
      return statfig::kExitOk;
    }
    if (*generate) {
      statfig::GenerateOptions opts;
      if (!gen_input.empty()) opts.input_file = gen_input;
      if (!gen_corpus.empty()) opts.corpus = gen_corpus;
      opts.out_dir = gen_out;
      opts.config_path = gen_config;
      opts.seed_override = gen_seed;
      return statfig::cmd_generate(opts);
    }
    if (*render) return statfig::cmd_render(render_metadata, render_out);
    if (*eval_cmd) return statfig::cmd_eval(eval_pred, eval_gold, eval_out, eval_fmeasure);
    if (*curate) {
      if (*filter) return statfig::cmd_curate_filter(f_sources, f_config, f_backend, f_out);
      if (*synth_text) {
        return statfig::cmd_curate_synth_text(st_sources, st_config, st_backend, st_drafts,
                                              st_out);
      }
      if (*synth_meta) {
        return statfig::cmd_curate_synth_meta(sm_sources, sm_config, sm_backend, sm_texts,
                                              sm_out);
      }
      if (*export_review) return statfig::cmd_curate_export_review(er_records, er_out);
      if (*import_review) {
        return statfig::cmd_curate_import_review(ir_file, ir_originals, ir_out,
                                                 ir_split_seed, ir_strict);
      }
      if (*prefs) {
        return statfig::cmd_curate_prefs(p_corpus, p_config, p_generator, p_judge, p_tlow,
                                         p_thigh, p_out);
      }
      if (*stats) return statfig::cmd_curate_stats(s_records, s_out);
    }
    std::cout << app.help();
    return statfig::kExitOk;
  } catch (const statfig::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return statfig::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return statfig::kExitPipeline;
  }
}
