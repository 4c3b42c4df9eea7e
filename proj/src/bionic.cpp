#include "larf/bionic.hpp"

#include <algorithm>
#include <string>

#include "larf/errors.hpp"
#include "larf/text.hpp"

namespace larf {

void BionicParams::validate() const {
  if (fixation < 1 || fixation > 5) {
    throw RangeError("fixation must be in [1,5], got " + std::to_string(fixation));
  }
  if (saccade < 10 || saccade > 50 || saccade % 10 != 0) {
    throw RangeError("saccade must be one of 10,20,30,40,50, got " + std::to_string(saccade));
  }
}

int bold_prefix_len(int word_len, int fixation) {
  if (word_len < 1) throw RangeError("word length must be positive");
  if (fixation < 1 || fixation > 5) throw RangeError("fixation must be in [1,5]");
  if (word_len <= 3 && fixation <= 3) return 1;
  const int scaled = (word_len * fixation + 5) / 6;
  return std::min(word_len, std::max(1, scaled));
}

AnnotatedDocument bionic_format(std::string_view text, const BionicParams& params) {
  params.validate();
  const std::u32string chars = to_u32(text);
  const std::vector<std::size_t> starts = paragraph_starts(chars);
  const std::size_t stride = static_cast<std::size_t>(params.saccade / 10);

  std::vector<AnnotationSpan> spans;
  std::size_t paragraph = 0;
  std::size_t word_index = 0;
  std::size_t i = 0;
  while (i < chars.size()) {
    while (paragraph + 1 < starts.size() && starts[paragraph + 1] <= i) {
      ++paragraph;
      word_index = 0;
    }
    // A word begins at a letter or digit; a leading combining mark attaches
    // to nothing and is skipped.
    if (!(is_letter(chars[i]) || is_digit(chars[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    int letters = 0;
    std::vector<std::size_t> letter_ends;
    while (i < chars.size() && is_word_char(chars[i])) {
      if (!is_mark(chars[i])) {
        ++letters;
        letter_ends.push_back(i + 1);
      } else if (!letter_ends.empty()) {
        letter_ends.back() = i + 1;
      }
      ++i;
    }
    if (word_index % stride == 0) {
      const int bold = bold_prefix_len(letters, params.fixation);
      spans.push_back({AnnotationKind::Emphasis, start, letter_ends[bold - 1]});
    }
    ++word_index;
  }
  return AnnotatedDocument(std::string(text), std::move(spans));
}

}  // namespace larf
