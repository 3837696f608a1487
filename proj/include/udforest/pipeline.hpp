#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace udforest {

// Everything a subcommand needs; unused fields stay at their defaults.
struct RunConfig {
  double theta = 0.5;
  std::string src_path;
  std::string tgt_path;
  std::string align_path;
  std::string relations_path;  // empty = no annotations
  std::string forest_path;     // export/score input
  std::string out_path = "-";  // "-" = stdout
  std::string format = "jsonl";
  std::uint64_t seed = 0;
  int dim = 768;
  int layers = 2;
  bool keep_unprojected = false;
  bool coarse_labels = false;
  bool lenient = false;
  bool group_by_root_upos = false;
  bool zero_init = false;
};

// Worker count: UDFOREST_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
int thread_cap();

// Subcommand bodies. Diagnostics go to `err`; payload goes to the
// configured output. Exit codes: 0 success, 1 runtime failure (with a
// count of failed sentences where applicable), 2 sentence-id mismatch
// between inputs in strict mode.
int run_merge(const RunConfig& config, std::ostream& err);
int run_project(const RunConfig& config, std::ostream& err);
int run_stats(const RunConfig& config, std::ostream& err);
int run_export(const RunConfig& config, std::ostream& err);
int run_score(const RunConfig& config, std::ostream& err);

}  // namespace udforest
