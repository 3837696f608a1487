#include <CLI11.hpp>

#include <iostream>

#include "udforest/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Code-mixed dependency forest toolkit"};
  app.require_subcommand(1);

  udforest::RunConfig config;

  const auto add_theta = [&](CLI::App* cmd) {
    cmd->add_option("--theta", config.theta,
                    "Minimum alignment score for merging two nodes")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  };
  const auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", config.out_path, "Output path (- for stdout)")
        ->capture_default_str();
  };
  const auto add_corpus = [&](CLI::App* cmd, bool relations_required) {
    cmd->add_option("--src", config.src_path, "Source-side CoNLL-U file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--tgt", config.tgt_path, "Target-side CoNLL-U file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--align", config.align_path,
                    "Word-alignment scores (sent_id, src, tgt, score TSV)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* rel = cmd->add_option("--relations", config.relations_path,
                                "Relation annotations (JSONL)")
                    ->check(CLI::ExistingFile);
    if (relations_required) rel->required();
    cmd->add_flag("--lenient", config.lenient,
                  "Process the sentence-id intersection instead of "
                  "requiring identical id sets");
  };

  auto* merge = app.add_subcommand(
      "merge", "Merge parallel dependency trees into code-mixed forests");
  add_theta(merge);
  add_corpus(merge, false);
  add_out(merge);
  merge->add_flag("--keep-unprojected", config.keep_unprojected,
                  "Keep annotations whose projection failed, using the "
                  "original side only");

  auto* project = app.add_subcommand(
      "project", "Project relation spans through the word alignments");
  add_theta(project);
  add_corpus(project, true);
  add_out(project);
  project->add_flag("--keep-unprojected", config.keep_unprojected,
                    "Emit failed projections unchanged on their original side");

  auto* stats = app.add_subcommand(
      "stats", "Report alignment-bias, distance, and merge statistics");
  add_theta(stats);
  add_corpus(stats, false);
  add_out(stats);
  stats->add_flag("--coarse-labels", config.coarse_labels,
                  "Compare dependency labels up to the first ':'");
  stats->add_flag("--group-by-root-upos", config.group_by_root_upos,
                  "Also break merge statistics down by source root UPOS");

  auto* exporter = app.add_subcommand(
      "export", "Convert forest JSONL into graph JSONL or GraphViz DOT");
  exporter->add_option("forest", config.forest_path, "Forest JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  exporter->add_option("--format", config.format, "Output format")
      ->check(CLI::IsMember({"jsonl", "dot"}))
      ->capture_default_str();
  add_out(exporter);

  auto* score = app.add_subcommand(
      "score", "Run the graph encoder and emit label distributions "
               "for annotated node pairs");
  score->add_option("forest", config.forest_path, "Forest JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--seed", config.seed, "Parameter and embedding seed")
      ->capture_default_str();
  score->add_option("--dim", config.dim, "Embedding width")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  score->add_option("--layers", config.layers, "Attention layer count")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  score->add_flag("--zero-init", config.zero_init,
                  "Zero parameters (uniform label distributions)");
  add_out(score);

  CLI11_PARSE(app, argc, argv);

  try {
    if (merge->parsed()) return udforest::run_merge(config, std::cerr);
    if (project->parsed()) return udforest::run_project(config, std::cerr);
    if (stats->parsed()) return udforest::run_stats(config, std::cerr);
    if (exporter->parsed()) return udforest::run_export(config, std::cerr);
    if (score->parsed()) return udforest::run_score(config, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
