#include "udforest/alignment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

namespace udforest {

namespace {

bool parse_index(const std::string& s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out >= 1;
}

bool parse_score(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

std::map<std::string, AlignmentMatrix> read_alignments(const std::string& text) {
  std::map<std::string, AlignmentMatrix> result;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() != 4)
      throw ParseError("expected 4 tab-separated columns, got " +
                           std::to_string(cols.size()),
                       line_no);

    int src = 0, tgt = 0;
    double score = 0.0;
    if (!parse_index(cols[1], src))
      throw ParseError("bad source index '" + cols[1] + "'", line_no);
    if (!parse_index(cols[2], tgt))
      throw ParseError("bad target index '" + cols[2] + "'", line_no);
    if (!parse_score(cols[3], score))
      throw ParseError("bad score '" + cols[3] + "'", line_no);
    if (score < 0.0 || score > 1.0)
      throw ParseError("score " + cols[3] + " outside [0,1]", line_no);

    AlignmentMatrix& m = result[cols[0]];
    m.sent_id = cols[0];
    auto [it, inserted] = m.entries.emplace(std::make_pair(src, tgt), score);
    if (!inserted && score > it->second) it->second = score;
  }
  return result;
}

AlignSearchResult align_search(const std::vector<Token>& src_nodes,
                               const std::vector<Token>& tgt_nodes,
                               const AlignmentMatrix& m, double theta) {
  std::set<int> src_ids, tgt_ids;
  std::map<int, const Token*> tgt_by_index;
  for (const Token& t : src_nodes) src_ids.insert(t.index);
  for (const Token& t : tgt_nodes) {
    tgt_ids.insert(t.index);
    tgt_by_index[t.index] = &t;
  }

  struct Candidate {
    double score;
    int src;
    int tgt;
  };
  std::vector<Candidate> candidates;
  for (const auto& [key, score] : m.entries) {
    if (score > theta && src_ids.count(key.first) && tgt_ids.count(key.second))
      candidates.push_back({score, key.first, key.second});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.src != b.src) return a.src < b.src;
              return a.tgt < b.tgt;
            });

  AlignSearchResult result;
  std::set<int> used_src, used_tgt;
  for (const Candidate& c : candidates) {
    if (used_src.count(c.src) || used_tgt.count(c.tgt)) continue;
    used_src.insert(c.src);
    used_tgt.insert(c.tgt);
    result.aligned.push_back(
        {c.src, c.tgt, c.score, tgt_by_index.at(c.tgt)->deprel});
  }
  for (const Token& t : src_nodes)
    if (!used_src.count(t.index)) result.nonaligned.push_back({t, Side::Src});
  for (const Token& t : tgt_nodes)
    if (!used_tgt.count(t.index)) result.nonaligned.push_back({t, Side::Tgt});
  return result;
}

}  // namespace udforest
