#include "larf/json_io.hpp"

#include "larf/errors.hpp"

namespace larf {

using nlohmann::json;

void to_json(json& j, AnnotationKind kind) { j = std::string(tag_name(kind)); }

void from_json(const json& j, AnnotationKind& kind) {
  if (!j.is_string()) throw FormatError("annotation kind must be a string");
  const auto parsed = kind_from_tag(j.get<std::string>());
  if (!parsed) throw FormatError("unknown annotation kind '" + j.get<std::string>() + "'");
  kind = *parsed;
}

void to_json(json& j, const AnnotatedDocument& doc) {
  json spans = json::array();
  for (const auto& s : doc.spans()) {
    spans.push_back({{"kind", s.kind}, {"start", s.start}, {"end", s.end}});
  }
  j = json{{"text", doc.text()}, {"spans", std::move(spans)},
           {"paragraph_breaks", doc.paragraph_breaks()}};
}

void from_json(const json& j, AnnotatedDocument& doc) {
  if (!j.is_object()) throw FormatError("document must be a JSON object");
  if (!j.contains("text") || !j["text"].is_string()) {
    throw FormatError("document.text must be a string");
  }
  const auto read_offset = [](const json& v, const char* what) -> std::size_t {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw FormatError(std::string(what) + " must be a non-negative integer");
    }
    return v.get<std::size_t>();
  };
  std::vector<AnnotationSpan> spans;
  if (j.contains("spans")) {
    if (!j["spans"].is_array()) throw FormatError("document.spans must be an array");
    for (const auto& s : j["spans"]) {
      if (!s.is_object() || !s.contains("kind") || !s.contains("start") || !s.contains("end")) {
        throw FormatError("span needs kind, start and end");
      }
      spans.push_back({s["kind"].get<AnnotationKind>(), read_offset(s["start"], "span.start"),
                       read_offset(s["end"], "span.end")});
    }
  }
  std::string text = j["text"].get<std::string>();
  if (j.contains("paragraph_breaks")) {
    if (!j["paragraph_breaks"].is_array()) {
      throw FormatError("document.paragraph_breaks must be an array");
    }
    std::vector<std::size_t> breaks;
    for (const auto& b : j["paragraph_breaks"]) breaks.push_back(read_offset(b, "paragraph break"));
    doc = AnnotatedDocument(std::move(text), std::move(spans), std::move(breaks));
  } else {
    doc = AnnotatedDocument(std::move(text), std::move(spans));
  }
}

void to_json(json& j, const VerificationReport& report) {
  json diffs = json::array();
  for (const auto& d : report.diffs) {
    diffs.push_back({{"original", d.original}, {"produced", d.produced}, {"position", d.position}});
  }
  j = json{{"passed", report.passed},
           {"diffs", std::move(diffs)},
           {"original_normalized", report.original_normalized},
           {"stripped_normalized", report.stripped_normalized}};
}

void to_json(json& j, const ScoreResult& result) {
  j = json{{"score", result.score}, {"rationale", result.rationale}, {"raw_reply", result.raw_reply}};
}

AnnotatedDocument document_from_json_text(std::string_view json_text) {
  const json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw FormatError("input is not valid JSON");
  return j.get<AnnotatedDocument>();
}

}  // namespace larf

namespace larf {

std::string dump_json(const nlohmann::json& j, int indent) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace larf
