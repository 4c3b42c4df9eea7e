#include "larf/markup.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace larf {

namespace {

bool is_ascii_alpha(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

bool is_name_char(char32_t c) {
  return is_ascii_alpha(c) || (c >= U'0' && c <= U'9') || c == U'-' || c == U':';
}

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

enum class TagType { Open, Close, SelfClosing, Declaration, Comment };

struct Tag {
  TagType type;
  std::string name;
  bool has_attributes = false;
  std::size_t end;  // index one past '>'
};

// Recognizes a tag starting at raw[pos] == '<'. Anything that does not look
// like a tag is left for the caller to treat as literal text.
std::optional<Tag> scan_tag(std::u32string_view raw, std::size_t pos) {
  const std::size_t n = raw.size();
  std::size_t i = pos + 1;
  if (i >= n) return std::nullopt;

  if (raw.substr(i, 3) == U"!--") {
    const auto close = raw.find(U"-->", i + 3);
    if (close == std::u32string_view::npos) return std::nullopt;
    return Tag{TagType::Comment, "!--", false, close + 3};
  }
  if (raw[i] == U'!' || raw[i] == U'?') {
    const auto close = raw.find(U'>', i);
    if (close == std::u32string_view::npos) return std::nullopt;
    std::string name(1, static_cast<char>(raw[i]));
    for (std::size_t k = i + 1; k < close && is_name_char(raw[k]); ++k) {
      name.push_back(static_cast<char>(ascii_lower(raw[k])));
    }
    return Tag{TagType::Declaration, name, false, close + 1};
  }

  TagType type = TagType::Open;
  if (raw[i] == U'/') {
    type = TagType::Close;
    ++i;
  }
  if (i >= n || !is_ascii_alpha(raw[i])) return std::nullopt;
  std::string name;
  while (i < n && is_name_char(raw[i])) name.push_back(static_cast<char>(ascii_lower(raw[i++])));
  if (i >= n) return std::nullopt;
  if (raw[i] != U'>' && raw[i] != U'/' && !is_space(raw[i])) return std::nullopt;

  bool has_attributes = false;
  bool self_closing = false;
  char32_t quote = 0;
  for (; i < n; ++i) {
    const char32_t c = raw[i];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == U'"' || c == U'\'') {
      quote = c;
      has_attributes = true;
    } else if (c == U'>') {
      if (type == TagType::Open && self_closing) type = TagType::SelfClosing;
      return Tag{type, name, has_attributes, i + 1};
    } else if (c == U'/') {
      self_closing = true;
      continue;
    } else if (!is_space(c)) {
      has_attributes = true;
    }
    self_closing = false;
  }
  return std::nullopt;
}

struct Entity {
  std::u32string_view name;
  char32_t value;
};

constexpr std::array<Entity, 5> kEntities{{
    {U"amp;", U'&'}, {U"lt;", U'<'}, {U"gt;", U'>'}, {U"quot;", U'"'}, {U"apos;", U'\''},
}};

std::optional<AnnotationKind> whitelisted_kind(std::string_view name) {
  if (name == "b") return AnnotationKind::Emphasis;
  return kind_from_tag(name);
}

class MarkupParser {
 public:
  explicit MarkupParser(std::u32string_view raw) : raw_(raw) {}

  ParsedMarkup run() {
    std::size_t i = 0;
    while (i < raw_.size()) {
      const char32_t c = raw_[i];
      if (c == U'<') {
        if (auto tag = scan_tag(raw_, i)) {
          handle_tag(*tag);
          i = tag->end;
          continue;
        }
      } else if (c == U'&') {
        if (auto decoded = decode_entity(i)) {
          emit_char(decoded->first);
          i = decoded->second;
          continue;
        }
      }
      emit_char(c);
      ++i;
    }
    close_all("end of input");

    ParsedMarkup out;
    out.document = AnnotatedDocument(to_utf8(text_), merge_adjacent(std::move(spans_)),
                                     std::move(breaks_));
    out.dropped_tags = std::move(dropped_);
    out.warnings = std::move(warnings_);
    return out;
  }

 private:
  static constexpr std::size_t kAtNextContent = static_cast<std::size_t>(-1);

  struct OpenSpan {
    AnnotationKind kind;
    std::size_t start;
  };

  std::optional<std::pair<char32_t, std::size_t>> decode_entity(std::size_t amp) const {
    const auto rest = raw_.substr(amp + 1);
    for (const auto& e : kEntities) {
      if (rest.substr(0, e.name.size()) == e.name) {
        return std::make_pair(e.value, amp + 1 + e.name.size());
      }
    }
    return std::nullopt;
  }

  void emit_char(char32_t c) {
    if (pending_break_) {
      if (is_space(c)) {
        // The text now ends in whitespace, so no separator will be inserted.
        resolve_deferred_starts();
      } else {
        resolve_break();
      }
    }
    text_.push_back(c);
    if (!is_space(c)) has_content_ = true;
  }

  void resolve_break() {
    if (has_content_) {
      if (!is_space(text_.back())) text_ += pending_paragraph_ ? U"\n\n" : U"\n";
      if (breaks_.empty() || breaks_.back() < text_.size()) breaks_.push_back(text_.size());
    }
    resolve_deferred_starts();
    pending_break_ = false;
    pending_paragraph_ = false;
  }

  void resolve_deferred_starts() {
    for (auto& open : stack_) {
      if (open.start == kAtNextContent) open.start = text_.size();
    }
  }

  void handle_tag(const Tag& tag) {
    if (tag.type == TagType::Comment || tag.type == TagType::Declaration) {
      dropped_.push_back({tag.name, text_.size()});
      return;
    }
    if (tag.name == "p" || tag.name == "br") {
      const bool paragraph = tag.name == "p";
      if (paragraph) close_all("paragraph end");
      pending_break_ = true;
      pending_paragraph_ = pending_paragraph_ || paragraph;
      if (tag.has_attributes) warn("ignored attributes on <" + tag.name + ">");
      return;
    }
    const auto kind = whitelisted_kind(tag.name);
    if (!kind) {
      if (tag.type == TagType::Close) {
        warn("dropped closing tag </" + tag.name + ">");
      } else {
        dropped_.push_back({tag.name, text_.size()});
      }
      return;
    }
    if (tag.has_attributes) warn("ignored attributes on <" + tag.name + ">");
    switch (tag.type) {
      case TagType::Open: open(*kind, tag.name); break;
      case TagType::Close: close(*kind, tag.name); break;
      default: warn("ignored self-closing <" + tag.name + "/>"); break;
    }
  }

  void open(AnnotationKind kind, const std::string& name) {
    auto& depth = nested_[static_cast<int>(kind)];
    const bool already_open = std::any_of(stack_.begin(), stack_.end(),
                                          [&](const OpenSpan& s) { return s.kind == kind; });
    if (already_open) {
      ++depth;
      warn("nested <" + name + "> inside an open <" + std::string(tag_name(kind)) + "> ignored");
      return;
    }
    // A span opened across a pending break starts after the separator.
    stack_.push_back({kind, pending_break_ ? kAtNextContent : text_.size()});
  }

  void close(AnnotationKind kind, const std::string& name) {
    auto& depth = nested_[static_cast<int>(kind)];
    const auto it = std::find_if(stack_.begin(), stack_.end(),
                                 [&](const OpenSpan& s) { return s.kind == kind; });
    if (it == stack_.end()) {
      warn("stray closing tag </" + name + ">");
      return;
    }
    if (depth > 0) {
      --depth;
      return;
    }
    while (!stack_.empty() && stack_.back().kind != kind) {
      warn("improperly nested <" + std::string(tag_name(stack_.back().kind)) +
           "> closed by </" + name + ">");
      finish(stack_.back());
      stack_.pop_back();
    }
    finish(stack_.back());
    stack_.pop_back();
  }

  void close_all(const std::string& where) {
    while (!stack_.empty()) {
      warn("unclosed <" + std::string(tag_name(stack_.back().kind)) + "> auto-closed at " + where);
      finish(stack_.back());
      stack_.pop_back();
    }
  }

  void finish(const OpenSpan& s) {
    nested_[static_cast<int>(s.kind)] = 0;
    const std::size_t start = s.start == kAtNextContent ? text_.size() : s.start;
    if (text_.size() > start) spans_.push_back({s.kind, start, text_.size()});
  }

  void warn(std::string message) {
    warnings_.push_back(std::move(message) + " at " + std::to_string(text_.size()));
  }

  std::u32string_view raw_;
  std::u32string text_;
  std::vector<AnnotationSpan> spans_;
  std::vector<std::size_t> breaks_;
  std::vector<DroppedTag> dropped_;
  std::vector<std::string> warnings_;
  std::vector<OpenSpan> stack_;
  std::array<int, 3> nested_{};
  bool pending_break_ = false;
  bool pending_paragraph_ = false;
  bool has_content_ = false;
};

}  // namespace

ParsedMarkup parse_markup(std::string_view raw) {
  const auto chars = to_u32(raw);
  return MarkupParser(chars).run();
}

std::string escape_html(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_html_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string emit_markup(const AnnotatedDocument& doc) {
  const std::string& text = doc.text();
  if (text.empty()) return {};
  const DecodedText decoded = decode_utf8(text);
  const std::size_t length = decoded.size();

  std::vector<std::size_t> bounds{0};
  for (std::size_t b : doc.paragraph_breaks()) {
    if (b > bounds.back() && b < length) bounds.push_back(b);
  }
  bounds.push_back(length);

  const auto slice = [&](std::size_t from, std::size_t to) {
    const std::size_t a = decoded.byte_offsets[from];
    const std::size_t b = decoded.byte_offsets[to];
    return escape_html(std::string_view(text).substr(a, b - a));
  };

  std::string out;
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    const std::size_t seg_start = bounds[p];
    const std::size_t seg_end = bounds[p + 1];

    // Spans clipped to this paragraph keep their canonical nesting order.
    std::vector<AnnotationSpan> local;
    for (const auto& s : doc.spans()) {
      const std::size_t a = std::max(s.start, seg_start);
      const std::size_t b = std::min(s.end, seg_end);
      if (a < b) local.push_back({s.kind, a, b});
    }
    std::sort(local.begin(), local.end(), span_order);

    out += "<p>";
    std::vector<AnnotationSpan> open;
    std::size_t next = 0;
    std::size_t cursor = seg_start;
    const auto close_until = [&](std::size_t pos) {
      while (!open.empty() && open.back().end <= pos) {
        out += "</";
        out += tag_name(open.back().kind);
        out += ">";
        open.pop_back();
      }
    };
    while (cursor < seg_end || !open.empty()) {
      close_until(cursor);
      while (next < local.size() && local[next].start == cursor) {
        out += "<";
        out += tag_name(local[next].kind);
        out += ">";
        open.push_back(local[next++]);
      }
      if (cursor >= seg_end) {
        close_until(seg_end);
        break;
      }
      std::size_t stop = seg_end;
      if (next < local.size()) stop = std::min(stop, local[next].start);
      if (!open.empty()) stop = std::min(stop, open.back().end);
      out += slice(cursor, stop);
      cursor = stop;
    }
    out += "</p>";
  }
  return out;
}

namespace {

struct Words {
  std::vector<std::string_view> tokens;
  std::vector<std::size_t> offsets;  // code-point offset of each token
};

Words split_words(const std::string& canonical) {
  Words w;
  std::size_t cp_offset = 0;
  std::size_t token_start = 0;
  std::size_t token_cp = 0;
  const std::string_view s(canonical);
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ' ') {
      if (i > token_start) {
        w.tokens.push_back(s.substr(token_start, i - token_start));
        w.offsets.push_back(token_cp);
      }
      token_start = i + 1;
      token_cp = cp_offset + 1;
    }
    if (i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++cp_offset;
  }
  return w;
}

std::string join(const std::vector<std::string_view>& tokens, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Cells in the LCS table beyond which the middle section is reported as one
// gap instead of being aligned word by word.
constexpr std::size_t kMaxLcsCells = 16'000'000;

}  // namespace

std::vector<TextDiff> word_diff(const CanonicalText& original, const CanonicalText& produced) {
  const Words a = split_words(original.str());
  const Words b = split_words(produced.str());

  std::size_t prefix = 0;
  while (prefix < a.tokens.size() && prefix < b.tokens.size() &&
         a.tokens[prefix] == b.tokens[prefix]) {
    ++prefix;
  }
  std::size_t suffix = 0;
  while (suffix < a.tokens.size() - prefix && suffix < b.tokens.size() - prefix &&
         a.tokens[a.tokens.size() - 1 - suffix] == b.tokens[b.tokens.size() - 1 - suffix]) {
    ++suffix;
  }
  const std::size_t n = a.tokens.size() - prefix - suffix;
  const std::size_t m = b.tokens.size() - prefix - suffix;

  const auto position_of = [&](std::size_t token_index) -> std::size_t {
    if (token_index < a.offsets.size()) return a.offsets[token_index];
    return code_point_length(original.str());
  };

  std::vector<TextDiff> diffs;
  if (n == 0 && m == 0) return diffs;

  // (i, j) pairs of matched tokens inside the middle section, in order.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  if (n > 0 && m > 0 && (n + 1) * (m + 1) <= kMaxLcsCells) {
    std::vector<uint32_t> table((n + 1) * (m + 1), 0);
    const auto at = [&](std::size_t i, std::size_t j) -> uint32_t& { return table[i * (m + 1) + j]; };
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = m; j-- > 0;) {
        if (a.tokens[prefix + i] == b.tokens[prefix + j]) {
          at(i, j) = at(i + 1, j + 1) + 1;
        } else {
          at(i, j) = std::max(at(i + 1, j), at(i, j + 1));
        }
      }
    }
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
      if (a.tokens[prefix + i] == b.tokens[prefix + j]) {
        matches.emplace_back(i, j);
        ++i;
        ++j;
      } else if (at(i + 1, j) >= at(i, j + 1)) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  matches.emplace_back(n, m);

  std::size_t ai = 0, bj = 0;
  for (const auto& [mi, mj] : matches) {
    if (mi > ai || mj > bj) {
      diffs.push_back({join(a.tokens, prefix + ai, prefix + mi),
                       join(b.tokens, prefix + bj, prefix + mj), position_of(prefix + ai)});
    }
    ai = mi + 1;
    bj = mj + 1;
  }
  return diffs;
}

VerificationReport verify_preservation(std::string_view original, const ParsedMarkup& parsed) {
  const CanonicalText a = normalize(original);
  const CanonicalText b = normalize(parsed.document.text());
  VerificationReport report;
  report.original_normalized = a.str();
  report.stripped_normalized = b.str();
  if (!(a == b)) report.diffs = word_diff(a, b);
  report.passed = report.diffs.empty();
  return report;
}

}  // namespace larf
