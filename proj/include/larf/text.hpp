#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace larf {

// UTF-8 text decoded to code points, with the byte offset of every code point
// in the source. byte_offsets has size() + 1 entries; the last is the source
// length. Malformed bytes decode to U+FFFD one byte at a time, so slicing the
// source by byte_offsets always reproduces the original bytes.
struct DecodedText {
  std::u32string chars;
  std::vector<std::size_t> byte_offsets;

  std::size_t size() const { return chars.size(); }
};

DecodedText decode_utf8(std::string_view utf8);
std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);
std::size_t code_point_length(std::string_view utf8);

bool is_space(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_mark(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
// Letters, digits, and combining marks: the characters that make up a word.
bool is_word_char(char32_t cp);

// Text after canonical composition and whitespace collapsing. Only
// normalize() produces one, so holding a CanonicalText means the
// normalization has been applied.
class CanonicalText {
 public:
  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }
  friend bool operator==(const CanonicalText&, const CanonicalText&) = default;

 private:
  explicit CanonicalText(std::string value) : value_(std::move(value)) {}
  friend CanonicalText normalize(std::string_view text);
  std::string value_;
};

// NFC, then every whitespace run collapsed to one space, then trimmed.
CanonicalText normalize(std::string_view text);

// Start offsets (code points) of each paragraph. Paragraphs are separated by
// whitespace runs holding two or more line breaks; a paragraph starts at the
// first non-whitespace character after such a run. The first entry is
// always 0, so the returned offsets partition the text.
std::vector<std::size_t> paragraph_starts(std::u32string_view text);

}  // namespace larf
