#include "udforest/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "udforest/codemix.hpp"
#include "udforest/encoder.hpp"
#include "udforest/errors.hpp"
#include "udforest/exporter.hpp"
#include "udforest/forest_io.hpp"
#include "udforest/metrics.hpp"

namespace udforest {

namespace {

using nlohmann::ordered_json;

// -------------------------------------------------------------------------
// Output target and worker pool.

struct OutputTarget {
  std::ofstream file;
  std::ostream* stream = nullptr;
};

bool open_output(const std::string& path, OutputTarget& target,
                 std::ostream& err) {
  if (path == "-") {
    target.stream = &std::cout;
    return true;
  }
  target.file.open(path, std::ios::binary);
  if (!target.file) {
    err << "cannot open output file: " << path << "\n";
    return false;
  }
  target.stream = &target.file;
  return true;
}

// Runs fn(0..n-1) across the worker pool. fn must not throw; callers
// capture failures into per-index slots so results stay ordered.
void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// -------------------------------------------------------------------------
// Corpus loading: parallel sentences in processing order plus per-sentence
// annotation lists.

struct Corpus {
  std::vector<UDTree> src;
  std::vector<UDTree> tgt;
  std::vector<AlignmentMatrix> align;
  std::vector<std::vector<RelationInstance>> relations;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool index_by_sent_id(const std::vector<UDTree>& trees,
                      const std::string& what,
                      std::map<std::string, int>& index, std::ostream& err) {
  for (int i = 0; i < static_cast<int>(trees.size()); ++i) {
    if (!index.emplace(trees[i].sent_id, i).second) {
      err << what << ": duplicate sent_id \"" << trees[i].sent_id << "\"\n";
      return false;
    }
  }
  return true;
}

// Strict mode demands identical sent_id sets across the three inputs.
bool check_sent_id_agreement(const std::set<std::string>& src,
                             const std::set<std::string>& tgt,
                             const std::set<std::string>& align,
                             std::ostream& err) {
  std::vector<std::string> offenders;
  auto scan = [&](const std::set<std::string>& ids) {
    for (const auto& id : ids) {
      std::string missing;
      if (!src.count(id)) missing += missing.empty() ? "src" : ", src";
      if (!tgt.count(id)) missing += missing.empty() ? "tgt" : ", tgt";
      if (!align.count(id)) missing += missing.empty() ? "align" : ", align";
      if (!missing.empty()) {
        offenders.push_back(id + " (missing in " + missing + ")");
      }
    }
  };
  scan(src);
  scan(tgt);
  scan(align);
  if (offenders.empty()) return true;
  std::sort(offenders.begin(), offenders.end());
  offenders.erase(std::unique(offenders.begin(), offenders.end()),
                  offenders.end());
  err << "sent_id sets disagree across src/tgt/align (src " << src.size()
      << ", tgt " << tgt.size() << ", align " << align.size() << ")\n";
  const std::size_t shown = std::min<std::size_t>(offenders.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    err << "  " << offenders[i] << "\n";
  }
  if (offenders.size() > shown) {
    err << "  ... and " << offenders.size() - shown << " more\n";
  }
  return false;
}

// Returns 0 on success, 1 on read errors, 2 on strict-mode disagreement.
int load_corpus(const RunConfig& config, std::ostream& err, Corpus& corpus) {
  std::vector<UDTree> src_trees;
  std::vector<UDTree> tgt_trees;
  std::map<std::string, AlignmentMatrix> matrices;
  std::vector<RelationInstance> relations;
  try {
    src_trees = parse_conllu(read_file(config.src_path));
    tgt_trees = parse_conllu(read_file(config.tgt_path));
    matrices = read_alignments(read_file(config.align_path));
    if (!config.relations_path.empty()) {
      relations = read_relations(read_file(config.relations_path));
    }
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 1;
  }

  std::map<std::string, int> src_index, tgt_index;
  if (!index_by_sent_id(src_trees, config.src_path, src_index, err) ||
      !index_by_sent_id(tgt_trees, config.tgt_path, tgt_index, err)) {
    return 1;
  }
  if (!config.lenient) {
    std::set<std::string> src_ids, tgt_ids, align_ids;
    for (const auto& [id, _] : src_index) src_ids.insert(id);
    for (const auto& [id, _] : tgt_index) tgt_ids.insert(id);
    for (const auto& [id, _] : matrices) align_ids.insert(id);
    if (!check_sent_id_agreement(src_ids, tgt_ids, align_ids, err)) {
      return 2;
    }
  }

  // Processing order follows the source file; lenient mode keeps the
  // sentences present on both sides and treats a missing alignment block
  // as an empty matrix.
  std::map<std::string, int> corpus_index;
  for (const auto& src_tree : src_trees) {
    const auto tgt_it = tgt_index.find(src_tree.sent_id);
    if (tgt_it == tgt_index.end()) continue;  // only possible in lenient mode
    corpus_index.emplace(src_tree.sent_id,
                         static_cast<int>(corpus.src.size()));
    corpus.src.push_back(src_tree);
    corpus.tgt.push_back(tgt_trees[tgt_it->second]);
    const auto align_it = matrices.find(src_tree.sent_id);
    if (align_it != matrices.end()) {
      corpus.align.push_back(align_it->second);
    } else {
      AlignmentMatrix empty;
      empty.sent_id = src_tree.sent_id;
      corpus.align.push_back(std::move(empty));
    }
  }
  corpus.relations.resize(corpus.src.size());

  long skipped_relations = 0;
  for (auto& rel : relations) {
    const auto it = corpus_index.find(rel.sent_id);
    if (it == corpus_index.end()) {
      err << "relation for unknown sent_id \"" << rel.sent_id
          << "\" skipped\n";
      ++skipped_relations;
      continue;
    }
    const UDTree& tree =
        rel.side == RelSide::Src ? corpus.src[it->second] : corpus.tgt[it->second];
    const int len = static_cast<int>(tree.tokens.size());
    if (rel.subj.end > len || rel.obj.end > len) {
      err << "relation span out of range in sentence \"" << rel.sent_id
          << "\" skipped\n";
      ++skipped_relations;
      continue;
    }
    corpus.relations[it->second].push_back(std::move(rel));
  }
  if (skipped_relations > 0) {
    err << skipped_relations << " relation(s) skipped during loading\n";
  }
  return 0;
}

AlignmentMatrix transposed(const AlignmentMatrix& m) {
  AlignmentMatrix t;
  t.sent_id = m.sent_id;
  for (const auto& [key, score] : m.entries) {
    t.entries[{key.second, key.first}] = score;
  }
  return t;
}

// Normalizes a relation to (src view, tgt view) through the alignment.
// Returns false when the projection fails on either span.
bool project_both_views(const RelationInstance& rel, const AlignmentMatrix& m,
                        double theta, RelationInstance& src_view,
                        RelationInstance& tgt_view) {
  if (rel.side == RelSide::Src) {
    const ProjectionResult proj = project_relation(rel, m, theta);
    if (!proj.ok) return false;
    src_view = rel;
    tgt_view = proj.projected;
    return true;
  }
  RelationInstance as_src = rel;
  as_src.side = RelSide::Src;
  const ProjectionResult proj =
      project_relation(as_src, transposed(m), theta);
  if (!proj.ok) return false;
  src_view = proj.projected;
  src_view.side = RelSide::Src;
  tgt_view = rel;
  return true;
}

ForestRelation relation_from_single_side(const RelationInstance& rel,
                                         const CodeMixedForest& forest) {
  const Side side = rel.side == RelSide::Src ? Side::Src : Side::Tgt;
  ForestRelation out;
  out.subj_nodes = span_to_forest_nodes(rel.subj, side, forest);
  out.obj_nodes = span_to_forest_nodes(rel.obj, side, forest);
  out.label = rel.label;
  return out;
}

void print_merge_report(const MergeReport& report, std::ostream& err) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "sentences:       " << report.sentence_count << "\n";
  out << "mean src len:    " << report.mean_src_len << "\n";
  out << "mean tgt len:    " << report.mean_tgt_len << "\n";
  out << "mean sum:        " << report.mean_sum << "\n";
  out << "mean merged:     " << report.mean_merged << "\n";
  out << "mean forest len: " << report.mean_forest_len << "\n";
  out.precision(1);
  out << "merge rate:      " << report.merge_rate * 100.0 << "%\n";
  err << out.str();
}

ordered_json merge_report_json(const MergeReport& report) {
  ordered_json j;
  j["mean_src_len"] = report.mean_src_len;
  j["mean_tgt_len"] = report.mean_tgt_len;
  j["mean_sum"] = report.mean_sum;
  j["mean_forest_len"] = report.mean_forest_len;
  j["mean_merged"] = report.mean_merged;
  j["merge_rate"] = report.merge_rate;
  j["sentence_count"] = report.sentence_count;
  return j;
}

ordered_json rate_or_null(const std::optional<double>& rate) {
  return rate ? ordered_json(*rate) : ordered_json(nullptr);
}

}  // namespace

int thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("UDFOREST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<int>(std::min<long>(v, 1024));
    }
  }
  return static_cast<int>(hw);
}

int run_merge(const RunConfig& config, std::ostream& err) {
  Corpus corpus;
  if (const int rc = load_corpus(config, err, corpus)) return rc;
  const int n = static_cast<int>(corpus.src.size());
  if (n == 0) {
    err << "empty corpus\n";
    return 1;
  }

  std::vector<std::string> lines(n);
  std::vector<std::string> failures(n);
  std::vector<std::optional<MergeStats>> stats(n);
  std::atomic<long> dropped_relations{0};
  parallel_for(n, [&](int i) {
    try {
      ForestRecord record;
      record.forest = construct_forest(corpus.src[i], corpus.tgt[i],
                                       corpus.align[i], config.theta);
      record.text = assemble_codemixed_text(corpus.src[i], record.forest);
      for (const auto& rel : corpus.relations[i]) {
        RelationInstance src_view, tgt_view;
        if (project_both_views(rel, corpus.align[i], config.theta, src_view,
                               tgt_view)) {
          record.relations.push_back(
              merge_annotations(src_view, tgt_view, record.forest));
        } else if (config.keep_unprojected) {
          record.relations.push_back(
              relation_from_single_side(rel, record.forest));
        } else {
          dropped_relations.fetch_add(1);
        }
      }
      stats[i] = merge_stats(record.forest);
      lines[i] = forest_record_to_json(record).dump();
    } catch (const std::exception& e) {
      failures[i] = corpus.src[i].sent_id + ": " + e.what();
    }
  });

  OutputTarget out;
  if (!open_output(config.out_path, out, err)) return 1;
  long failed = 0;
  std::vector<MergeStats> collected;
  collected.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!failures[i].empty()) {
      err << failures[i] << "\n";
      ++failed;
      continue;
    }
    *out.stream << lines[i] << "\n";
    collected.push_back(*stats[i]);
  }
  out.stream->flush();

  if (dropped_relations.load() > 0) {
    err << dropped_relations.load() << " relation(s) dropped (projection failed)\n";
  }
  if (!collected.empty()) {
    print_merge_report(merge_report(collected), err);
  }
  if (failed > 0) {
    err << failed << " sentence(s) failed\n";
    return 1;
  }
  return 0;
}

int run_project(const RunConfig& config, std::ostream& err) {
  Corpus corpus;
  if (const int rc = load_corpus(config, err, corpus)) return rc;
  const int n = static_cast<int>(corpus.src.size());
  if (n == 0) {
    err << "empty corpus\n";
    return 1;
  }

  std::vector<std::string> lines(n);
  std::atomic<long> failed_projections{0};
  parallel_for(n, [&](int i) {
    std::ostringstream block;
    for (const auto& rel : corpus.relations[i]) {
      RelationInstance projected;
      bool ok;
      if (rel.side == RelSide::Src) {
        const ProjectionResult proj =
            project_relation(rel, corpus.align[i], config.theta);
        ok = proj.ok;
        if (ok) {
          projected = proj.projected;
          projected.side = RelSide::Tgt;
        }
      } else {
        RelationInstance as_src = rel;
        as_src.side = RelSide::Src;
        const ProjectionResult proj = project_relation(
            as_src, transposed(corpus.align[i]), config.theta);
        ok = proj.ok;
        if (ok) {
          projected = proj.projected;
          projected.side = RelSide::Src;
        }
      }
      if (!ok) {
        failed_projections.fetch_add(1);
        if (!config.keep_unprojected) continue;
        projected = rel;
      }
      ordered_json j;
      j["sent_id"] = rel.sent_id;
      j["subj_span"] = {projected.subj.begin, projected.subj.end};
      j["obj_span"] = {projected.obj.begin, projected.obj.end};
      j["label"] = rel.label;
      j["side"] = rel_side_name(projected.side);
      block << j.dump() << "\n";
    }
    lines[i] = block.str();
  });

  OutputTarget out;
  if (!open_output(config.out_path, out, err)) return 1;
  for (const auto& block : lines) *out.stream << block;
  out.stream->flush();
  if (failed_projections.load() > 0) {
    err << failed_projections.load() << " projection(s) failed\n";
  }
  return 0;
}

int run_stats(const RunConfig& config, std::ostream& err) {
  Corpus corpus;
  if (const int rc = load_corpus(config, err, corpus)) return rc;
  const int n = static_cast<int>(corpus.src.size());
  if (n == 0) {
    err << "empty corpus\n";
    return 1;
  }

  struct SentenceStats {
    BiasAccumulator bias;
    DistanceAccumulator src_dist;
    DistanceAccumulator tgt_dist;
    std::optional<MergeStats> merge;
    std::string root_upos;
    std::string failure;
  };
  std::vector<SentenceStats> parts(n);
  parallel_for(n, [&](int i) {
    auto& part = parts[i];
    try {
      const UDTree& src = corpus.src[i];
      const UDTree& tgt = corpus.tgt[i];
      const AlignmentMatrix& m = corpus.align[i];
      part.bias.add_sentence(src, tgt, m, config.theta, config.coarse_labels);
      for (const auto& rel : corpus.relations[i]) {
        if (rel.side == RelSide::Src) {
          part.bias.add_relation(src, tgt, m, config.theta, rel);
          part.src_dist.add(src, rel);
        } else {
          RelationInstance as_src = rel;
          as_src.side = RelSide::Src;
          part.bias.add_relation(tgt, src, transposed(m), config.theta,
                                 as_src);
          part.tgt_dist.add(tgt, rel);
        }
      }
      const CodeMixedForest forest =
          construct_forest(src, tgt, m, config.theta);
      part.merge = merge_stats(forest);
      for (const auto& token : src.tokens) {
        if (token.head == 0) {
          part.root_upos = token.upos;
          break;
        }
      }
    } catch (const std::exception& e) {
      part.failure = corpus.src[i].sent_id + ": " + e.what();
    }
  });

  BiasAccumulator bias;
  DistanceAccumulator src_dist, tgt_dist;
  std::vector<MergeStats> merged;
  std::map<std::string, std::vector<MergeStats>> by_root_upos;
  long failed = 0;
  for (const auto& part : parts) {
    if (!part.failure.empty()) {
      err << part.failure << "\n";
      ++failed;
      continue;
    }
    bias.combine(part.bias);
    src_dist.combine(part.src_dist);
    tgt_dist.combine(part.tgt_dist);
    merged.push_back(*part.merge);
    if (config.group_by_root_upos) {
      by_root_upos[part.root_upos].push_back(*part.merge);
    }
  }
  if (merged.empty()) {
    err << "all sentences failed\n";
    return 1;
  }

  const BiasReport bias_report = bias.report();
  ordered_json j;
  j["theta"] = config.theta;
  {
    ordered_json b;
    b["misaligned_word_rate"] = rate_or_null(bias_report.misaligned_word_rate);
    b["mismatched_edge_rate"] = rate_or_null(bias_report.mismatched_edge_rate);
    b["mismatched_path_rate"] = rate_or_null(bias_report.mismatched_path_rate);
    b["sentence_count"] = bias_report.sentence_count;
    j["bias"] = std::move(b);
  }
  {
    auto dist_json = [](const DistanceReport& r) {
      ordered_json d;
      d["mean_sequential_distance"] = r.mean_sequential_distance;
      d["mean_syntactic_distance"] = r.mean_syntactic_distance;
      d["instance_count"] = r.instance_count;
      return d;
    };
    ordered_json d;
    d["src"] = dist_json(src_dist.report());
    d["tgt"] = dist_json(tgt_dist.report());
    j["distances"] = std::move(d);
  }
  j["merge"] = merge_report_json(merge_report(merged));
  if (config.group_by_root_upos) {
    ordered_json groups;
    for (const auto& [upos, stats] : by_root_upos) {
      groups[upos] = merge_report_json(merge_report(stats));
    }
    j["by_root_upos"] = std::move(groups);
  }

  OutputTarget out;
  if (!open_output(config.out_path, out, err)) return 1;
  *out.stream << j.dump(2) << "\n";
  out.stream->flush();
  if (failed > 0) {
    err << failed << " sentence(s) failed\n";
    return 1;
  }
  return 0;
}

int run_export(const RunConfig& config, std::ostream& err) {
  std::vector<ForestRecord> records;
  try {
    records = read_forest_jsonl(read_file(config.forest_path));
  } catch (const std::exception& e) {
    err << config.forest_path << ": " << e.what() << "\n";
    return 1;
  }

  const int n = static_cast<int>(records.size());
  std::vector<std::string> lines(n);
  parallel_for(n, [&](int i) {
    if (config.format == "dot") {
      lines[i] = to_dot(records[i].forest);
    } else {
      lines[i] = graph_record_to_json(records[i].forest).dump() + "\n";
    }
  });

  OutputTarget out;
  if (!open_output(config.out_path, out, err)) return 1;
  for (int i = 0; i < n; ++i) {
    if (config.format == "dot" && i > 0) *out.stream << "\n";
    *out.stream << lines[i];
  }
  out.stream->flush();
  return 0;
}

int run_score(const RunConfig& config, std::ostream& err) {
  std::vector<ForestRecord> records;
  try {
    records = read_forest_jsonl(read_file(config.forest_path));
  } catch (const std::exception& e) {
    err << config.forest_path << ": " << e.what() << "\n";
    return 1;
  }

  std::set<std::string> label_set;
  for (const auto& record : records) {
    for (const auto& rel : record.relations) {
      label_set.insert(rel.label);
    }
  }
  if (label_set.empty()) {
    err << "no relations to score\n";
    return 1;
  }
  const std::vector<std::string> labels(label_set.begin(), label_set.end());
  const int label_count = static_cast<int>(labels.size());

  EncoderParams params;
  try {
    params = config.zero_init
                 ? EncoderParams::zeros(config.dim, label_count, config.layers)
                 : EncoderParams::random(config.dim, label_count,
                                         config.layers, config.seed);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 1;
  }
  const HashEmbedder embedder{config.dim, config.seed};

  const int n = static_cast<int>(records.size());
  std::vector<std::string> lines(n);
  std::vector<std::string> failures(n);
  parallel_for(n, [&](int i) {
    const auto& record = records[i];
    if (record.relations.empty()) return;
    try {
      const ForestGraph graph = to_graph(
          record.forest, [&](std::string_view form) { return embedder(form); },
          config.dim);
      const Eigen::MatrixXd encoded = encode(graph, params);
      std::ostringstream block;
      for (const auto& rel : record.relations) {
        const int subj = *std::min_element(rel.subj_nodes.begin(),
                                           rel.subj_nodes.end());
        const int obj =
            *std::min_element(rel.obj_nodes.begin(), rel.obj_nodes.end());
        const Eigen::VectorXd probs = biaffine_score(encoded, subj, obj, params);
        ordered_json j;
        j["sent_id"] = record.forest.sent_id;
        j["subj"] = rel.subj_nodes;
        j["obj"] = rel.obj_nodes;
        ordered_json dist;
        for (int l = 0; l < label_count; ++l) {
          dist[labels[l]] = probs(l);
        }
        j["probs"] = std::move(dist);
        block << j.dump() << "\n";
      }
      lines[i] = block.str();
    } catch (const std::exception& e) {
      failures[i] = record.forest.sent_id + ": " + e.what();
    }
  });

  OutputTarget out;
  if (!open_output(config.out_path, out, err)) return 1;
  long failed = 0;
  for (int i = 0; i < n; ++i) {
    if (!failures[i].empty()) {
      err << failures[i] << "\n";
      ++failed;
      continue;
    }
    *out.stream << lines[i];
  }
  out.stream->flush();
  if (failed > 0) {
    err << failed << " sentence(s) failed\n";
    return 1;
  }
  return 0;
}

}  // namespace udforest
