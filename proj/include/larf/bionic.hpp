#pragma once

#include <string_view>

#include "larf/annotation.hpp"

namespace larf {

// Fixation sets how much of each word is bolded (1..5); saccade sets which
// words are bolded (10 bolds every word, 20 every second word, ...).
struct BionicParams {
  int fixation = 3;
  int saccade = 10;

  // Throws RangeError unless fixation is in [1,5] and saccade is one of
  // 10, 20, 30, 40, 50.
  void validate() const;
};

// Number of leading characters to bold in a word of word_len characters.
// Short words (<= 3) get a single bold letter at fixation <= 3; otherwise
// ceil(word_len * fixation / 6), kept within [1, word_len].
int bold_prefix_len(int word_len, int fixation);

// Words are maximal runs of letters and digits (combining marks stay with
// their base); a hyphen splits a compound into independent words. Counting
// restarts in every paragraph, and every (saccade/10)-th word starting from
// the first gets an Emphasis span over its bold prefix.
AnnotatedDocument bionic_format(std::string_view text, const BionicParams& params = {});

}  // namespace larf
