#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "udforest/codemix.hpp"

namespace udforest {

// One output line of the merge stage: the forest itself plus the linear
// code-mixed rendering and any annotations carried over onto node sets.
struct ForestRecord {
  CodeMixedForest forest;
  std::vector<TextToken> text;
  std::vector<ForestRelation> relations;
};

// Field order is part of the format: sent_id, src_len, tgt_len,
// merged_count, nodes, text, relations. Node rows likewise keep
// id, form, origin, src_index, tgt_index, deprel, parent; absent values
// (ROOT indices, single-origin indices) serialize as null.
nlohmann::ordered_json forest_record_to_json(const ForestRecord& record);

// Strict inverse: every required key present with the right type, no
// unknown keys, and the decoded forest passes structural validation.
// Throws ParseError (schema) or ValidationError (structure).
ForestRecord forest_record_from_json(const nlohmann::json& j);

// Reads forest records from JSONL text, one object per non-empty line.
std::vector<ForestRecord> read_forest_jsonl(const std::string& text);

// Reads relation annotations from JSONL lines of the shape
// {"sent_id": ..., "subj_span": [a, b], "obj_span": [a, b],
//  "label": ..., "side": "SRC"|"TGT"} with side defaulting to SRC.
std::vector<RelationInstance> read_relations(const std::string& text);

}  // namespace udforest
