#include "udforest/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <set>

namespace udforest {

namespace {

// Undirected token-token path between u and v (both inclusive), via BFS over
// the tree's arcs. The virtual ROOT is not traversable.
std::vector<int> token_path(const UDTree& tree, int u, int v) {
  const int n = static_cast<int>(tree.tokens.size());
  std::vector<std::vector<int>> adj(n + 1);
  for (const Token& t : tree.tokens) {
    if (t.head >= 1) {
      adj[t.index].push_back(t.head);
      adj[t.head].push_back(t.index);
    }
  }
  std::vector<int> prev(n + 1, -1);
  std::deque<int> queue = {u};
  prev[u] = u;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    if (cur == v) break;
    for (int next : adj[cur]) {
      if (prev[next] == -1) {
        prev[next] = cur;
        queue.push_back(next);
      }
    }
  }
  std::vector<int> path;
  for (int cur = v; cur != u; cur = prev[cur]) path.push_back(cur);
  path.push_back(u);
  std::reverse(path.begin(), path.end());
  return path;
}

// Label of the arc crossed between two adjacent tokens: the deprel of
// whichever endpoint is the dependent.
std::string step_label(const UDTree& tree, int a, int b) {
  const Token& ta = tree.tokens[a - 1];
  return ta.head == b ? coarse_label(ta.deprel)
                      : coarse_label(tree.tokens[b - 1].deprel);
}

std::vector<std::string> path_labels(const UDTree& tree, int u, int v) {
  std::vector<int> path = token_path(tree, u, v);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    labels.push_back(step_label(tree, path[i], path[i + 1]));
  return labels;
}

}  // namespace

std::pair<long, long> misaligned_word_counts(const UDTree& src,
                                             const UDTree& tgt,
                                             const AlignmentMatrix& m,
                                             double theta) {
  std::set<int> touched_src, touched_tgt;
  for (const auto& [key, score] : m.entries) {
    if (score > theta) {
      touched_src.insert(key.first);
      touched_tgt.insert(key.second);
    }
  }
  long misaligned = 0;
  for (const Token& t : src.tokens)
    if (!touched_src.count(t.index)) ++misaligned;
  for (const Token& t : tgt.tokens)
    if (!touched_tgt.count(t.index)) ++misaligned;
  long total = static_cast<long>(src.tokens.size() + tgt.tokens.size());
  return {misaligned, total};
}

double misaligned_word_rate(const UDTree& src, const UDTree& tgt,
                            const AlignmentMatrix& m, double theta) {
  auto [misaligned, total] = misaligned_word_counts(src, tgt, m, theta);
  return total == 0 ? 0.0 : static_cast<double>(misaligned) / total;
}

std::map<int, int> whole_sentence_alignment(const UDTree& src,
                                            const UDTree& tgt,
                                            const AlignmentMatrix& m,
                                            double theta) {
  AlignSearchResult res = align_search(src.tokens, tgt.tokens, m, theta);
  std::map<int, int> a;
  for (const AlignedPair& p : res.aligned) a[p.src_index] = p.tgt_index;
  return a;
}

std::pair<long, long> mismatched_edge_counts(const UDTree& src,
                                             const UDTree& tgt,
                                             const AlignmentMatrix& m,
                                             double theta, bool coarse_labels) {
  std::map<int, int> a = whole_sentence_alignment(src, tgt, m, theta);
  long edges = 0, mismatched = 0;
  for (const Token& dep : src.tokens) {
    if (dep.head == 0) continue;  // the arc from ROOT cannot align
    ++edges;
    auto head_it = a.find(dep.head);
    auto dep_it = a.find(dep.index);
    bool match = head_it != a.end() && dep_it != a.end();
    if (match) {
      const Token& image = tgt.tokens[dep_it->second - 1];
      match = image.head == head_it->second;
      if (match && coarse_labels)
        match = coarse_label(image.deprel) == coarse_label(dep.deprel);
    }
    if (!match) ++mismatched;
  }
  return {mismatched, edges};
}

double mismatched_edge_rate(const UDTree& src, const UDTree& tgt,
                            const AlignmentMatrix& m, double theta,
                            bool coarse_labels) {
  auto [mismatched, edges] =
      mismatched_edge_counts(src, tgt, m, theta, coarse_labels);
  return edges == 0 ? 0.0 : static_cast<double>(mismatched) / edges;
}

int span_head_index(const UDTree& tree, const Span& span) {
  for (int i = span.begin; i <= span.end; ++i) {
    int head = tree.tokens[i - 1].head;
    if (head < span.begin || head > span.end) return i;
  }
  return span.begin;
}

bool relation_path_mismatch(const UDTree& src, const UDTree& tgt,
                            const AlignmentMatrix& m, double theta,
                            const RelationInstance& rel) {
  int subj_head = span_head_index(src, rel.subj);
  int obj_head = span_head_index(src, rel.obj);
  std::map<int, int> a = whole_sentence_alignment(src, tgt, m, theta);
  auto s_it = a.find(subj_head);
  auto o_it = a.find(obj_head);
  if (s_it == a.end() || o_it == a.end()) return true;
  return path_labels(src, subj_head, obj_head) !=
         path_labels(tgt, s_it->second, o_it->second);
}

Distances subject_object_distances(const UDTree& tree,
                                   const RelationInstance& rel) {
  int subj_head = span_head_index(tree, rel.subj);
  int obj_head = span_head_index(tree, rel.obj);
  Distances d;
  d.sequential = std::abs(subj_head - obj_head);
  d.syntactic = static_cast<int>(token_path(tree, subj_head, obj_head).size()) - 1;
  return d;
}

MergeStats merge_stats(const CodeMixedForest& forest) {
  return {forest.src_len, forest.tgt_len, forest.merged_count};
}

MergeReport merge_report(const std::vector<MergeStats>& stats) {
  if (stats.empty()) throw ValidationError("merge report over an empty corpus");
  long src = 0, tgt = 0, merged = 0;
  for (const MergeStats& s : stats) {
    src += s.src_len;
    tgt += s.tgt_len;
    merged += s.merged_count;
  }
  const double n = static_cast<double>(stats.size());
  MergeReport report;
  report.mean_src_len = src / n;
  report.mean_tgt_len = tgt / n;
  report.mean_sum = (src + tgt) / n;
  report.mean_merged = merged / n;
  report.mean_forest_len = (src + tgt - merged) / n;
  report.merge_rate =
      (src + tgt) == 0 ? 0.0 : static_cast<double>(merged) / (src + tgt);
  report.sentence_count = static_cast<long>(stats.size());
  return report;
}

void BiasAccumulator::add_sentence(const UDTree& src, const UDTree& tgt,
                                   const AlignmentMatrix& m, double theta,
                                   bool coarse_labels) {
  auto [mis, total] = misaligned_word_counts(src, tgt, m, theta);
  misaligned_tokens += mis;
  total_tokens += total;
  auto [bad, edges] = mismatched_edge_counts(src, tgt, m, theta, coarse_labels);
  mismatched_edges += bad;
  total_edges += edges;
  ++sentences;
}

void BiasAccumulator::add_relation(const UDTree& src, const UDTree& tgt,
                                   const AlignmentMatrix& m, double theta,
                                   const RelationInstance& rel) {
  if (relation_path_mismatch(src, tgt, m, theta, rel)) ++mismatched_paths;
  ++total_paths;
}

void BiasAccumulator::combine(const BiasAccumulator& other) {
  misaligned_tokens += other.misaligned_tokens;
  total_tokens += other.total_tokens;
  mismatched_edges += other.mismatched_edges;
  total_edges += other.total_edges;
  mismatched_paths += other.mismatched_paths;
  total_paths += other.total_paths;
  sentences += other.sentences;
}

BiasReport BiasAccumulator::report() const {
  BiasReport r;
  if (total_tokens > 0)
    r.misaligned_word_rate = static_cast<double>(misaligned_tokens) / total_tokens;
  if (total_edges > 0)
    r.mismatched_edge_rate = static_cast<double>(mismatched_edges) / total_edges;
  if (total_paths > 0)
    r.mismatched_path_rate = static_cast<double>(mismatched_paths) / total_paths;
  r.sentence_count = sentences;
  return r;
}

void DistanceAccumulator::add(const UDTree& tree, const RelationInstance& rel) {
  Distances d = subject_object_distances(tree, rel);
  sequential_total += d.sequential;
  syntactic_total += d.syntactic;
  ++instances;
}

void DistanceAccumulator::combine(const DistanceAccumulator& other) {
  sequential_total += other.sequential_total;
  syntactic_total += other.syntactic_total;
  instances += other.instances;
}

DistanceReport DistanceAccumulator::report() const {
  DistanceReport r;
  r.instance_count = instances;
  if (instances > 0) {
    r.mean_sequential_distance = static_cast<double>(sequential_total) / instances;
    r.mean_syntactic_distance = static_cast<double>(syntactic_total) / instances;
  }
  return r;
}

}  // namespace udforest
