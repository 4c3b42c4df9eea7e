#include "larf/annotation.hpp"

#include <algorithm>
#include <array>

#include "larf/errors.hpp"
#include "larf/text.hpp"

namespace larf {

std::string_view tag_name(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::Emphasis: return "strong";
    case AnnotationKind::Highlight: return "mark";
    case AnnotationKind::Underline: return "u";
  }
  return "strong";
}

std::optional<AnnotationKind> kind_from_tag(std::string_view tag) {
  if (tag == "strong") return AnnotationKind::Emphasis;
  if (tag == "mark") return AnnotationKind::Highlight;
  if (tag == "u") return AnnotationKind::Underline;
  return std::nullopt;
}

bool span_order(const AnnotationSpan& a, const AnnotationSpan& b) {
  if (a.start != b.start) return a.start < b.start;
  if (a.end != b.end) return a.end > b.end;
  return a.kind < b.kind;
}

namespace {

std::string describe(const AnnotationSpan& s) {
  return std::string(tag_name(s.kind)) + " " + std::to_string(s.start) + ".." +
         std::to_string(s.end);
}

// Returns an empty string when valid, otherwise a message; sets is_range.
std::string check_spans(std::size_t text_length, std::span<const AnnotationSpan> spans,
                        bool& is_range) {
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > text_length) {
      is_range = true;
      return "span " + describe(s) + " outside text of length " +
             std::to_string(text_length);
    }
  }
  std::vector<AnnotationSpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(), span_order);

  std::vector<AnnotationSpan> open;
  std::array<int, 3> open_per_kind{};
  for (const auto& s : sorted) {
    while (!open.empty() && open.back().end <= s.start) {
      --open_per_kind[static_cast<int>(open.back().kind)];
      open.pop_back();
    }
    if (!open.empty() && s.end > open.back().end) {
      is_range = false;
      return "span " + describe(s) + " partially overlaps " + describe(open.back());
    }
    if (open_per_kind[static_cast<int>(s.kind)] > 0) {
      is_range = false;
      return "span " + describe(s) + " overlaps another " +
             std::string(tag_name(s.kind)) + " span";
    }
    open.push_back(s);
    ++open_per_kind[static_cast<int>(s.kind)];
  }
  return {};
}

}  // namespace

void validate_spans(std::size_t text_length, std::span<const AnnotationSpan> spans) {
  bool is_range = false;
  const std::string problem = check_spans(text_length, spans, is_range);
  if (problem.empty()) return;
  if (is_range) throw RangeError(problem);
  throw OverlapError(problem);
}

bool spans_valid(std::size_t text_length, std::span<const AnnotationSpan> spans) {
  bool is_range = false;
  return check_spans(text_length, spans, is_range).empty();
}

AnnotatedDocument::AnnotatedDocument(std::string text, std::vector<AnnotationSpan> spans)
    : text_(std::move(text)), spans_(std::move(spans)) {
  const auto decoded = to_u32(text_);
  length_ = decoded.size();
  validate_spans(length_, spans_);
  std::sort(spans_.begin(), spans_.end(), span_order);
  const auto starts = paragraph_starts(decoded);
  paragraph_breaks_.assign(starts.begin() + 1, starts.end());
}

AnnotatedDocument::AnnotatedDocument(std::string text, std::vector<AnnotationSpan> spans,
                                     std::vector<std::size_t> paragraph_breaks)
    : text_(std::move(text)),
      spans_(std::move(spans)),
      paragraph_breaks_(std::move(paragraph_breaks)) {
  length_ = code_point_length(text_);
  validate_spans(length_, spans_);
  std::sort(spans_.begin(), spans_.end(), span_order);
  for (std::size_t i = 0; i < paragraph_breaks_.size(); ++i) {
    if (paragraph_breaks_[i] > length_) {
      throw RangeError("paragraph break " + std::to_string(paragraph_breaks_[i]) +
                       " beyond text length " + std::to_string(length_));
    }
    if (i > 0 && paragraph_breaks_[i] <= paragraph_breaks_[i - 1]) {
      throw RangeError("paragraph breaks must be strictly increasing");
    }
  }
}

std::string strip_annotations(const AnnotatedDocument& doc) { return doc.text(); }

AnnotatedDocument apply_annotations(std::string text, std::vector<AnnotationSpan> spans) {
  return AnnotatedDocument(std::move(text), std::move(spans));
}

namespace {

bool crosses(const AnnotationSpan& a, const AnnotationSpan& b) {
  const bool disjoint = a.end <= b.start || b.end <= a.start;
  const bool a_in_b = b.start <= a.start && a.end <= b.end;
  const bool b_in_a = a.start <= b.start && b.end <= a.end;
  return !(disjoint || a_in_b || b_in_a);
}

}  // namespace

std::vector<AnnotationSpan> merge_adjacent(std::vector<AnnotationSpan> spans) {
  // Same-kind spans never overlap, so within one kind a start-sorted list
  // exposes every adjacent pair as neighbours. Passes repeat because a merge
  // of one kind can make a merge of another kind nest properly.
  bool changed = true;
  while (changed) {
    changed = false;
    for (AnnotationKind kind : kAllKinds) {
      std::vector<AnnotationSpan> same;
      std::vector<AnnotationSpan> others;
      for (const auto& s : spans) (s.kind == kind ? same : others).push_back(s);
      std::sort(same.begin(), same.end(), span_order);

      std::vector<AnnotationSpan> merged;
      for (const auto& s : same) {
        if (!merged.empty() && merged.back().end == s.start) {
          const AnnotationSpan joined{kind, merged.back().start, s.end};
          const bool ok = std::none_of(others.begin(), others.end(),
                                       [&](const AnnotationSpan& o) { return crosses(joined, o); });
          if (ok) {
            merged.back() = joined;
            changed = true;
            continue;
          }
        }
        merged.push_back(s);
      }
      others.insert(others.end(), merged.begin(), merged.end());
      spans = std::move(others);
    }
  }
  std::sort(spans.begin(), spans.end(), span_order);
  return spans;
}

AnnotatedDocument merge_adjacent(const AnnotatedDocument& doc) {
  return AnnotatedDocument(doc.text(), merge_adjacent(doc.spans()), doc.paragraph_breaks());
}

}  // namespace larf
