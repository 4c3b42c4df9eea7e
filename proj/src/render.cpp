#include "larf/render.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "larf/errors.hpp"
#include "larf/markup.hpp"
#include "larf/text.hpp"

namespace larf {

namespace {

struct HighlightColors {
  std::string_view token;
  std::string_view light;
  std::string_view dark;
};

constexpr std::array<HighlightColors, 4> kHighlights{{
    {"yellow", "#fff3a3", "#6b5d00"},
    {"green", "#c8f2c2", "#245c2a"},
    {"blue", "#cfe6ff", "#1f4770"},
    {"pink", "#ffd6e7", "#6e2447"},
}};

const HighlightColors* find_highlight(std::string_view token) {
  for (const auto& h : kHighlights) {
    if (h.token == token) return &h;
  }
  return nullptr;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void RenderStyle::validate() const {
  if (!(font_scale > 0)) throw RangeError("font_scale must be > 0");
  if (!(letter_spacing >= 0)) throw RangeError("letter_spacing must be >= 0");
  if (!(line_spacing >= 1)) throw RangeError("line_spacing must be >= 1");
  if (!find_highlight(highlight_token)) {
    throw RangeError("unknown highlight token '" + highlight_token + "'");
  }
}

std::string render_html(const AnnotatedDocument& doc, const RenderStyle& style) {
  style.validate();
  const bool dark = style.theme == Theme::Dark;
  const auto* highlight = find_highlight(style.highlight_token);

  std::string html;
  html += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  html += "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n";
  html += "<title>Annotated text</title>\n<style>\n";
  html += "body{margin:2rem auto;max-width:42rem;padding:0 1rem;";
  html += "font-family:Verdana,Arial,Helvetica,sans-serif;";
  html += "font-size:" + number(18 * style.font_scale) + "px;";
  html += "line-height:" + number(style.line_spacing) + ";";
  html += "letter-spacing:" + number(style.letter_spacing) + "em;";
  html += dark ? "background:#1e1e1e;color:#e8e6e3;}\n" : "background:#fdfbf5;color:#222222;}\n";
  html += "p{margin:0 0 1em 0;}\n";
  html += "strong{font-weight:700;}\n";
  html += "mark{background:" + std::string(dark ? highlight->dark : highlight->light) +
          ";color:inherit;padding:0 .1em;}\n";
  html += "u{text-decoration:underline;text-decoration-thickness:.12em;text-underline-offset:.2em;}\n";
  html += "</style>\n</head>\n<body>";
  html += emit_markup(doc);
  html += "</body>\n</html>\n";
  return html;
}

namespace {

struct Sgr {
  std::string_view on;
  std::string_view off;
};

Sgr sgr_for(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::Emphasis: return {"\x1b[1m", "\x1b[22m"};
    case AnnotationKind::Highlight: return {"\x1b[7m", "\x1b[27m"};
    case AnnotationKind::Underline: return {"\x1b[4m", "\x1b[24m"};
  }
  return {"", ""};
}

}  // namespace

std::string render_terminal(const AnnotatedDocument& doc) {
  const std::string& text = doc.text();
  const DecodedText decoded = decode_utf8(text);

  // (position, order, code): closes sort before opens at the same position,
  // inner spans close before outer ones and outer spans open first.
  struct Event {
    std::size_t position;
    int order;
    std::string_view code;
  };
  std::vector<Event> events;
  const auto& spans = doc.spans();
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const Sgr sgr = sgr_for(spans[i].kind);
    events.push_back({spans[i].start, 1'000'000 + static_cast<int>(i), sgr.on});
    events.push_back({spans[i].end, -static_cast<int>(i), sgr.off});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.position != b.position ? a.position < b.position : a.order < b.order;
  });

  std::string out;
  std::size_t cursor = 0;
  for (const auto& e : events) {
    const std::size_t byte = decoded.byte_offsets[e.position];
    out.append(text, cursor, byte - cursor);
    cursor = byte;
    out += e.code;
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

}  // namespace larf
