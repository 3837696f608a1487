#include "udforest/forest_io.hpp"

#include <set>
#include <sstream>
#include <string>

#include "udforest/errors.hpp"

namespace udforest {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json opt_index(const std::optional<int>& v) {
  return v ? json(*v) : json(nullptr);
}

void require_keys(const json& obj, const std::set<std::string>& keys,
                  const char* what) {
  if (!obj.is_object()) {
    throw ParseError(std::string(what) + ": expected an object");
  }
  for (const auto& key : keys) {
    if (!obj.contains(key)) {
      throw ParseError(std::string(what) + ": missing key \"" + key + "\"");
    }
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!keys.count(key)) {
      throw ParseError(std::string(what) + ": unknown key \"" + key + "\"");
    }
  }
}

int int_field(const json& obj, const char* key, const char* what) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ParseError(std::string(what) + ": \"" + key + "\" must be an integer");
  }
  return v.get<int>();
}

std::string string_field(const json& obj, const char* key, const char* what) {
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    throw ParseError(std::string(what) + ": \"" + key + "\" must be a string");
  }
  return v.get<std::string>();
}

std::optional<int> opt_int_field(const json& obj, const char* key,
                                 const char* what) {
  const auto& v = obj.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_integer()) {
    throw ParseError(std::string(what) + ": \"" + key +
                     "\" must be an integer or null");
  }
  return v.get<int>();
}

Origin origin_field(const json& obj, const char* what) {
  const std::string name = string_field(obj, "origin", what);
  try {
    return origin_from_name(name);
  } catch (const ValidationError&) {
    throw ParseError(std::string(what) + ": unknown origin \"" + name + "\"");
  }
}

std::vector<int> int_array_field(const json& obj, const char* key,
                                 const char* what) {
  const auto& v = obj.at(key);
  if (!v.is_array()) {
    throw ParseError(std::string(what) + ": \"" + key + "\" must be an array");
  }
  std::vector<int> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    if (!item.is_number_integer()) {
      throw ParseError(std::string(what) + ": \"" + key +
                       "\" must contain integers");
    }
    out.push_back(item.get<int>());
  }
  return out;
}

ForestNode node_from_json(const json& j) {
  require_keys(j, {"id", "form", "origin", "src_index", "tgt_index", "deprel",
                   "parent"},
               "forest node");
  ForestNode node;
  node.id = int_field(j, "id", "forest node");
  node.form = string_field(j, "form", "forest node");
  node.origin = origin_field(j, "forest node");
  node.src_index = opt_int_field(j, "src_index", "forest node");
  node.tgt_index = opt_int_field(j, "tgt_index", "forest node");
  if (node.origin == Origin::Root) {
    if (!j.at("deprel").is_null() || !j.at("parent").is_null()) {
      throw ParseError("forest node: ROOT must have null deprel and parent");
    }
    node.deprel.clear();
    node.parent = -1;
  } else {
    node.deprel = string_field(j, "deprel", "forest node");
    node.parent = int_field(j, "parent", "forest node");
  }
  return node;
}

TextToken text_token_from_json(const json& j) {
  require_keys(j, {"form", "origin", "src_index", "tgt_index"}, "text token");
  TextToken tok;
  tok.form = string_field(j, "form", "text token");
  tok.origin = origin_field(j, "text token");
  tok.src_index = int_field(j, "src_index", "text token");
  tok.tgt_index = opt_int_field(j, "tgt_index", "text token");
  return tok;
}

ForestRelation relation_from_json(const json& j) {
  require_keys(j, {"subj_nodes", "obj_nodes", "label"}, "forest relation");
  ForestRelation rel;
  rel.subj_nodes = int_array_field(j, "subj_nodes", "forest relation");
  rel.obj_nodes = int_array_field(j, "obj_nodes", "forest relation");
  rel.label = string_field(j, "label", "forest relation");
  return rel;
}

Span span_from_json(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer()) {
    throw ParseError(std::string("relation: \"") + key +
                     "\" must be a [begin, end] integer pair");
  }
  return Span{v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

nlohmann::ordered_json forest_record_to_json(const ForestRecord& record) {
  const auto& forest = record.forest;
  ordered_json rec;
  rec["sent_id"] = forest.sent_id;
  rec["src_len"] = forest.src_len;
  rec["tgt_len"] = forest.tgt_len;
  rec["merged_count"] = forest.merged_count;

  auto nodes = ordered_json::array();
  for (const auto& node : forest.nodes) {
    ordered_json n;
    n["id"] = node.id;
    n["form"] = node.form;
    n["origin"] = origin_name(node.origin);
    n["src_index"] = opt_index(node.src_index);
    n["tgt_index"] = opt_index(node.tgt_index);
    if (node.origin == Origin::Root) {
      n["deprel"] = nullptr;
      n["parent"] = nullptr;
    } else {
      n["deprel"] = node.deprel;
      n["parent"] = node.parent;
    }
    nodes.push_back(std::move(n));
  }
  rec["nodes"] = std::move(nodes);

  auto text = ordered_json::array();
  for (const auto& tok : record.text) {
    ordered_json t;
    t["form"] = tok.form;
    t["origin"] = origin_name(tok.origin);
    t["src_index"] = tok.src_index;
    t["tgt_index"] = opt_index(tok.tgt_index);
    text.push_back(std::move(t));
  }
  rec["text"] = std::move(text);

  auto relations = ordered_json::array();
  for (const auto& rel : record.relations) {
    ordered_json r;
    r["subj_nodes"] = rel.subj_nodes;
    r["obj_nodes"] = rel.obj_nodes;
    r["label"] = rel.label;
    relations.push_back(std::move(r));
  }
  rec["relations"] = std::move(relations);
  return rec;
}

ForestRecord forest_record_from_json(const nlohmann::json& j) {
  require_keys(j, {"sent_id", "src_len", "tgt_len", "merged_count", "nodes",
                   "text", "relations"},
               "forest record");
  ForestRecord record;
  auto& forest = record.forest;
  forest.sent_id = string_field(j, "sent_id", "forest record");
  forest.src_len = int_field(j, "src_len", "forest record");
  forest.tgt_len = int_field(j, "tgt_len", "forest record");
  forest.merged_count = int_field(j, "merged_count", "forest record");

  const auto& nodes = j.at("nodes");
  if (!nodes.is_array()) {
    throw ParseError("forest record: \"nodes\" must be an array");
  }
  for (const auto& n : nodes) {
    forest.nodes.push_back(node_from_json(n));
  }

  const auto& text = j.at("text");
  if (!text.is_array()) {
    throw ParseError("forest record: \"text\" must be an array");
  }
  for (const auto& t : text) {
    record.text.push_back(text_token_from_json(t));
  }

  const auto& relations = j.at("relations");
  if (!relations.is_array()) {
    throw ParseError("forest record: \"relations\" must be an array");
  }
  for (const auto& r : relations) {
    record.relations.push_back(relation_from_json(r));
  }

  validate_forest(forest);
  return record;
}

std::vector<ForestRecord> read_forest_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::vector<ForestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      records.push_back(forest_record_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return records;
}

std::vector<RelationInstance> read_relations(const std::string& text) {
  std::istringstream in(text);
  std::vector<RelationInstance> relations;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      if (!j.is_object()) {
        throw ParseError("relation: expected an object");
      }
      for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "sent_id" && key != "subj_span" && key != "obj_span" &&
            key != "label" && key != "side") {
          throw ParseError("relation: unknown key \"" + key + "\"");
        }
      }
      for (const char* key : {"sent_id", "subj_span", "obj_span", "label"}) {
        if (!j.contains(key)) {
          throw ParseError(std::string("relation: missing key \"") + key +
                           "\"");
        }
      }
      RelationInstance rel;
      rel.sent_id = string_field(j, "sent_id", "relation");
      rel.subj = span_from_json(j, "subj_span");
      rel.obj = span_from_json(j, "obj_span");
      rel.label = string_field(j, "label", "relation");
      if (j.contains("side")) {
        const std::string side = string_field(j, "side", "relation");
        if (side == "SRC") {
          rel.side = RelSide::Src;
        } else if (side == "TGT") {
          rel.side = RelSide::Tgt;
        } else {
          throw ParseError("relation: side must be \"SRC\" or \"TGT\"");
        }
      } else {
        rel.side = RelSide::Src;
      }
      if (rel.subj.begin < 1 || rel.subj.end < rel.subj.begin ||
          rel.obj.begin < 1 || rel.obj.end < rel.obj.begin) {
        throw ParseError("relation: spans must satisfy 1 <= begin <= end");
      }
      relations.push_back(std::move(rel));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return relations;
}

}  // namespace udforest
