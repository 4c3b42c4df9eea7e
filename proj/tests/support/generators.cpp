#include "support/generators.hpp"

#include <array>

#include "larf/text.hpp"

namespace larf::testing {

namespace {

template <typename T, std::size_t N>
const T& pick(Rng& rng, const std::array<T, N>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

std::string random_text(Rng& rng, const TextOptions& options) {
  static const std::array<std::string, 16> ascii_words{
      "the", "pyramid", "Djoser", "ruled", "in", "Egypt", "BlackPink", "is", "a",
      "popular", "South", "Korean", "girl", "group", "Imhotep", "stone"};
  static const std::array<std::string, 8> unicode_words{
      "Rosé", "Rosé", "naïve", "Ελληνικά", "日本語", "Straße", "ﬁne", "̈́x"};
  static const std::array<std::string, 6> markup_words{"a&b", "x<y", "y>z", "\"quote\"",
                                                       "it's", "&amp;"};
  static const std::array<std::string, 5> punctuation{".", ",", "!", "?", ";"};
  static const std::array<std::string, 6> spaces{" ", " ", " ", "  ", "\t", "\n"};

  const int words = uniform(rng, options.min_words, options.max_words);
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i > 0) {
      if (options.paragraphs && uniform(rng, 0, 14) == 0) {
        out += uniform(rng, 0, 1) ? "\n\n" : "\n \n";
      } else {
        out += pick(rng, spaces);
      }
    }
    const int r = uniform(rng, 0, 19);
    if (r < 2) {
      out += std::to_string(uniform(rng, 0, 3000));
    } else if (r < 4 && options.unicode) {
      out += pick(rng, unicode_words);
    } else if (r < 5 && options.markup_chars) {
      out += pick(rng, markup_words);
    } else {
      out += pick(rng, ascii_words);
    }
    if (uniform(rng, 0, 6) == 0) out += pick(rng, punctuation);
  }
  if (uniform(rng, 0, 5) == 0) out = " " + out;
  if (uniform(rng, 0, 5) == 0) out += "\n";
  return out;
}

std::vector<AnnotationSpan> random_spans(Rng& rng, std::size_t length, int attempts) {
  std::vector<AnnotationSpan> spans;
  if (length == 0) return spans;
  for (int i = 0; i < attempts; ++i) {
    const auto a = std::uniform_int_distribution<std::size_t>(0, length - 1)(rng);
    const auto max_len = std::min<std::size_t>(length - a, 1 + length / 3);
    const auto len = std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
    const auto kind = static_cast<AnnotationKind>(uniform(rng, 0, 2));
    spans.push_back({kind, a, a + len});
    if (!spans_valid(length, spans)) spans.pop_back();
  }
  return spans;
}

AnnotatedDocument random_document(Rng& rng, const TextOptions& options) {
  std::string text = random_text(rng, options);
  const std::size_t length = code_point_length(text);
  return AnnotatedDocument(std::move(text), random_spans(rng, length));
}

std::string random_markup_noise(Rng& rng, int pieces) {
  static const std::array<std::string, 40> fragments{
      "<strong>", "</strong>", "<STRONG>", "<b>", "</b>", "<mark>", "</mark>", "<u>", "</u>",
      "<p>", "</p>", "<br>", "<br/>", "<script>", "</script>", "<div class=\"x\">", "</div>",
      "<img src=a>", "<!-- c -->", "<!DOCTYPE html>", "<strong id='q'>", "<", ">", "</",
      "&amp;", "&lt;", "&gt;", "&quot;", "&apos;", "&nbsp;", "&", "text", " ", "\n", "Rosé",
      "<u/>", "<mark\n>", "<1abc>", "< p>", "</ strong>"};
  std::string out;
  for (int i = 0; i < pieces; ++i) {
    const int r = uniform(rng, 0, 9);
    if (r == 0) {
      out.push_back(static_cast<char>(uniform(rng, 0, 255)));
    } else {
      out += pick(rng, fragments);
    }
  }
  return out;
}

}  // namespace larf::testing
