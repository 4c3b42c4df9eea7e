#pragma once

#include "json.hpp"
#include "larf/annotation.hpp"
#include "larf/annotator.hpp"
#include "larf/markup.hpp"
#include "larf/scorer.hpp"

namespace larf {

// {"text": ..., "spans": [{"kind","start","end"}], "paragraph_breaks": [...]}.
// Reading validates the document and throws FormatError, RangeError or
// OverlapError.
void to_json(nlohmann::json& j, const AnnotatedDocument& doc);
void from_json(const nlohmann::json& j, AnnotatedDocument& doc);

void to_json(nlohmann::json& j, AnnotationKind kind);
void from_json(const nlohmann::json& j, AnnotationKind& kind);

// {"passed", "diffs": [{"original","produced","position"}]} plus the two
// normalized strings.
void to_json(nlohmann::json& j, const VerificationReport& report);

void to_json(nlohmann::json& j, const ScoreResult& result);

AnnotatedDocument document_from_json_text(std::string_view json_text);

}  // namespace larf

namespace larf {

// Serializes with invalid UTF-8 replaced by U+FFFD instead of throwing.
std::string dump_json(const nlohmann::json& j, int indent = -1);

}  // namespace larf
