#include "udforest/treebank.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <sstream>

namespace udforest {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strict non-negative integer, no sign, no leftovers.
bool parse_uint(const std::string& s, int& out) {
  if (s.empty()) return false;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return false;
  out = value;
  return true;
}

}  // namespace

void validate_tree(const UDTree& tree) {
  const std::string where = "sentence '" + tree.sent_id + "': ";
  const int n = static_cast<int>(tree.tokens.size());
  if (n == 0) throw ValidationError(where + "empty token list");

  int root_count = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = tree.tokens[i];
    if (t.index != i + 1)
      throw ValidationError(where + "token indices not contiguous at position " +
                            std::to_string(i + 1));
    if (t.head < 0 || t.head > n)
      throw ValidationError(where + "head " + std::to_string(t.head) +
                            " out of range for token " + std::to_string(t.index));
    if (t.head == t.index)
      throw ValidationError(where + "cycle: token " + std::to_string(t.index) +
                            " is its own head");
    if (t.deprel.empty())
      throw ValidationError(where + "empty deprel on token " +
                            std::to_string(t.index));
    if (t.head == 0) ++root_count;
  }
  if (root_count == 0) throw ValidationError(where + "no root token");
  if (root_count > 1)
    throw ValidationError(where + "multiple root tokens (" +
                          std::to_string(root_count) + ")");

  // With a single root, unreachable tokens can only sit on a head cycle.
  std::vector<std::vector<int>> child_ids(n + 1);
  for (const Token& t : tree.tokens) child_ids[t.head].push_back(t.index);
  std::deque<int> queue = {0};
  int reached = 0;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (int c : child_ids[cur]) {
      ++reached;
      queue.push_back(c);
    }
  }
  if (reached != n)
    throw ValidationError(where + "cycle: only " + std::to_string(reached) +
                          " of " + std::to_string(n) +
                          " tokens reachable from ROOT");
}

std::vector<UDTree> parse_conllu(const std::string& text) {
  std::vector<UDTree> trees;
  UDTree current;
  bool saw_content = false;
  int sentence_ordinal = 0;
  int line_no = 0;

  auto flush = [&]() {
    if (!saw_content) return;
    ++sentence_ordinal;
    if (current.sent_id.empty())
      current.sent_id = std::to_string(sentence_ordinal);
    validate_tree(current);
    trees.push_back(std::move(current));
    current = UDTree{};
    saw_content = false;
  };

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      std::string body = trim(line.substr(1));
      if (body.rfind("sent_id", 0) == 0) {
        std::string rest = trim(body.substr(7));
        if (!rest.empty() && rest[0] == '=') current.sent_id = trim(rest.substr(1));
      }
      saw_content = true;
      continue;
    }

    std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 10)
      throw ParseError("expected 10 tab-separated columns, got " +
                           std::to_string(cols.size()),
                       line_no);
    saw_content = true;
    // Multiword ranges and empty nodes carry no tree structure here.
    if (cols[0].find('-') != std::string::npos ||
        cols[0].find('.') != std::string::npos)
      continue;

    Token tok;
    if (!parse_uint(cols[0], tok.index) || tok.index < 1)
      throw ParseError("bad token id '" + cols[0] + "'", line_no);
    tok.form = cols[1];
    tok.upos = cols[3];
    if (!parse_uint(cols[6], tok.head))
      throw ParseError("bad head '" + cols[6] + "'", line_no);
    tok.deprel = cols[7];
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return trees;
}

std::string serialize_conllu(const UDTree& tree) {
  validate_tree(tree);
  std::string out = "# sent_id = " + tree.sent_id + "\n";
  for (const Token& t : tree.tokens) {
    out += std::to_string(t.index);
    out += '\t';
    out += t.form.empty() ? "_" : t.form;
    out += "\t_\t";
    out += t.upos.empty() ? "_" : t.upos;
    out += "\t_\t_\t";
    out += std::to_string(t.head);
    out += '\t';
    out += t.deprel;
    out += "\t_\t_\n";
  }
  out += '\n';
  return out;
}

std::vector<Token> children(const UDTree& tree, int index) {
  const int n = static_cast<int>(tree.tokens.size());
  if (index < 0 || index > n)
    throw ValidationError("sentence '" + tree.sent_id + "': child lookup index " +
                          std::to_string(index) + " out of range 0.." +
                          std::to_string(n));
  std::vector<Token> kids;
  for (const Token& t : tree.tokens)
    if (t.head == index) kids.push_back(t);
  return kids;
}

std::string coarse_label(const std::string& deprel) {
  std::size_t colon = deprel.find(':');
  return colon == std::string::npos ? deprel : deprel.substr(0, colon);
}

}  // namespace udforest
