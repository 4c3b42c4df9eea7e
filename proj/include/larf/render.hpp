#pragma once

#include <string>

#include "larf/annotation.hpp"

namespace larf {

enum class Theme { Light, Dark };

struct RenderStyle {
  double font_scale = 1.0;      // > 0
  double letter_spacing = 0.0;  // em, >= 0
  double line_spacing = 1.5;    // >= 1
  std::string highlight_token = "yellow";  // yellow | green | blue | pink
  Theme theme = Theme::Light;

  // Throws RangeError on an out-of-range value or unknown highlight token.
  void validate() const;
};

// Standalone UTF-8 HTML page with an embedded stylesheet. The <body> holds
// exactly emit_markup(doc).
std::string render_html(const AnnotatedDocument& doc, const RenderStyle& style = {});

// Document text with ANSI SGR sequences: bold for Emphasis, reverse video for
// Highlight, underline for Underline.
std::string render_terminal(const AnnotatedDocument& doc);

}  // namespace larf
