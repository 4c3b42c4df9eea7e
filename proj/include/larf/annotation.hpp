#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace larf {

enum class AnnotationKind { Emphasis, Highlight, Underline };

inline constexpr AnnotationKind kAllKinds[] = {
    AnnotationKind::Emphasis, AnnotationKind::Highlight,
    AnnotationKind::Underline};

// "strong", "mark", "u".
std::string_view tag_name(AnnotationKind kind);
std::optional<AnnotationKind> kind_from_tag(std::string_view tag);

// Half-open range [start, end) of code points carrying one presentation mark.
struct AnnotationSpan {
  AnnotationKind kind = AnnotationKind::Emphasis;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const AnnotationSpan&, const AnnotationSpan&) = default;
};

// Canonical span order: start ascending, end descending, then kind. Outer
// spans therefore precede the spans nested inside them.
bool span_order(const AnnotationSpan& a, const AnnotationSpan& b);

// Throws RangeError for a span outside [0, text_length] or with
// start >= end, OverlapError for same-kind overlap or partial overlap
// between kinds. Runs in O(n log n).
void validate_spans(std::size_t text_length, std::span<const AnnotationSpan> spans);
bool spans_valid(std::size_t text_length, std::span<const AnnotationSpan> spans);

// Plain text plus non-overlapping typed spans and paragraph break offsets.
// Immutable once constructed; every constructor enforces the invariants.
class AnnotatedDocument {
 public:
  AnnotatedDocument() = default;
  // Paragraph breaks are derived from blank lines in `text`.
  AnnotatedDocument(std::string text, std::vector<AnnotationSpan> spans);
  AnnotatedDocument(std::string text, std::vector<AnnotationSpan> spans,
                    std::vector<std::size_t> paragraph_breaks);

  const std::string& text() const noexcept { return text_; }
  const std::vector<AnnotationSpan>& spans() const noexcept { return spans_; }
  const std::vector<std::size_t>& paragraph_breaks() const noexcept {
    return paragraph_breaks_;
  }
  // Length in code points.
  std::size_t length() const noexcept { return length_; }

  friend bool operator==(const AnnotatedDocument&, const AnnotatedDocument&) = default;

 private:
  std::string text_;
  std::vector<AnnotationSpan> spans_;
  std::vector<std::size_t> paragraph_breaks_;
  std::size_t length_ = 0;
};

// Annotations carry no text, so this is the document text verbatim.
std::string strip_annotations(const AnnotatedDocument& doc);

AnnotatedDocument apply_annotations(std::string text, std::vector<AnnotationSpan> spans);

// Joins same-kind spans that touch (a.end == b.start) wherever the joined
// span still nests properly with every other span.
std::vector<AnnotationSpan> merge_adjacent(std::vector<AnnotationSpan> spans);
AnnotatedDocument merge_adjacent(const AnnotatedDocument& doc);

}  // namespace larf
