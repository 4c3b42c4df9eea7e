#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "larf/annotation.hpp"
#include "larf/text.hpp"

namespace larf {

struct DroppedTag {
  std::string name;       // lower-cased tag name
  std::size_t position;   // code-point offset into the parsed text
  friend bool operator==(const DroppedTag&, const DroppedTag&) = default;
};

struct ParsedMarkup {
  AnnotatedDocument document;
  std::vector<DroppedTag> dropped_tags;
  std::vector<std::string> warnings;
};

// Tag-augmented text to a document over the strong/mark/u whitelist.
//
// <b> is read as <strong>. <p>, </p> and <br> mark paragraph breaks; when the
// text on either side of a break has no whitespace between it, a line break
// separator is inserted so words never fuse. The five standard entities are
// decoded. Any other tag is removed (its inner text stays) and recorded in
// dropped_tags; closing tags of such elements and attributes on whitelisted
// tags produce warnings. Whitelisted tags left open at a paragraph end are
// closed there with a warning. Never throws on any input.
ParsedMarkup parse_markup(std::string_view raw);

// Deterministic serialization: every paragraph wrapped in <p>...</p>, spans
// as properly nested strong/mark/u elements (re-opened across paragraph
// boundaries), and & < > " ' escaped.
std::string emit_markup(const AnnotatedDocument& doc);

std::string escape_html(std::string_view text);

// Escapes only & < >, which is enough for text content; quotes stay readable.
std::string escape_html_text(std::string_view text);

struct TextDiff {
  std::string original;   // words from the original side of the gap
  std::string produced;   // words from the produced side of the gap
  std::size_t position;   // code-point offset into original_normalized
  friend bool operator==(const TextDiff&, const TextDiff&) = default;
};

struct VerificationReport {
  bool passed = true;
  std::string original_normalized;
  std::string stripped_normalized;
  std::vector<TextDiff> diffs;
};

// Word-level longest-common-subsequence gaps between two canonical texts.
std::vector<TextDiff> word_diff(const CanonicalText& original, const CanonicalText& produced);

VerificationReport verify_preservation(std::string_view original, const ParsedMarkup& parsed);

}  // namespace larf
