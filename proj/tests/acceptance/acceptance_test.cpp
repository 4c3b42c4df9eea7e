// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "larf/annotator.hpp"
#include "larf/bionic.hpp"
#include "larf/json_io.hpp"
#include "larf/markup.hpp"
#include "larf/prompts.hpp"
#include "larf/render.hpp"
#include "larf/scorer.hpp"
#include "support/bionic_oracle.hpp"
#include "support/generators.hpp"
#include "support/markup_oracle.hpp"
#include "support/mock_backend.hpp"
#include "support/oracles.hpp"
#include "support/service_harness.hpp"

using namespace larf;
using nlohmann::json;

namespace {

// Collects the first few failure messages of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (messages_.size() < 5) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::string out = std::to_string(failures_) + " failure(s)";
    for (const auto& m : messages_) out += "; " + m;
    return out;
  }

 private:
  int failures_ = 0;
  std::vector<std::string> messages_;
};

LLMConfig mock_config(int retries = 2) {
  LLMConfig config;
  config.model_name = "mock";
  config.max_retries = retries;
  return config;
}

std::vector<std::string> texts_of(const AnnotatedDocument& doc, AnnotationKind kind) {
  std::vector<std::string> out;
  const std::u32string t = to_u32(doc.text());
  for (const auto& s : doc.spans()) {
    if (s.kind == kind) out.push_back(to_utf8(t.substr(s.start, s.end - s.start)));
  }
  return out;
}

bool strip_apply_identity(const AnnotatedDocument& doc) {
  return strip_annotations(apply_annotations(doc.text(), doc.spans())) == doc.text();
}

void preservation(Check& c) {
  testing::Rng rng(1001);
  testing::TextOptions options;
  options.min_words = 1;
  int offline = 0;
  while (offline < 1000) {
    const std::string text = testing::random_text(rng, options);
    if (normalize(text).empty()) continue;
    const auto doc = offline_annotate(text);
    const auto report = verify_preservation(text, parse_markup(emit_markup(doc)));
    c.expect(report.passed, "offline document " + std::to_string(offline) + " failed verification");
    c.expect(doc.text() == text, "offline document " + std::to_string(offline) + " changed text");
    c.expect(strip_apply_identity(doc), "strip(apply) differs for offline document " +
                                            std::to_string(offline));
    ++offline;
  }
  int scripted = 0;
  while (scripted < 50) {
    const auto source = testing::random_document(rng, options);
    if (normalize(source.text()).empty()) continue;
    auto backend = testing::scripted_backend({emit_markup(source)});
    const auto result = annotate(source.text(), PromptSpec{}, mock_config(), *backend);
    const std::string id = "scripted reply " + std::to_string(scripted);
    c.expect(result.report.passed && !result.fallback_used, id + " failed verification");
    c.expect(result.document.text() == source.text(), id + " changed text");
    c.expect(testing::coverage(result.document) == testing::coverage(source), id + " lost spans");
    c.expect(strip_apply_identity(result.document), "strip(apply) differs for " + id);
    ++scripted;
  }
}

void whitelist_fuzzing(Check& c) {
  testing::Rng rng(1002);
  for (int i = 0; i < 10000; ++i) {
    const std::string raw = testing::random_markup_noise(rng);
    const std::string id = "input " + std::to_string(i);
    ParsedMarkup parsed;
    try {
      parsed = parse_markup(raw);
    } catch (const std::exception& e) {
      c.expect(false, id + " threw " + e.what());
      continue;
    }
    for (const auto& s : parsed.document.spans()) {
      c.expect(s.kind == AnnotationKind::Emphasis || s.kind == AnnotationKind::Highlight ||
                   s.kind == AnnotationKind::Underline,
               id + " produced an unknown kind");
    }
    const auto expected = testing::expect_markup(raw);
    c.expect(parsed.dropped_tags.size() == expected.dropped_tags,
             id + " logged " + std::to_string(parsed.dropped_tags.size()) + " dropped tags, expected " +
                 std::to_string(expected.dropped_tags));
    const auto closers = std::count_if(
        parsed.warnings.begin(), parsed.warnings.end(),
        [](const std::string& w) { return w.rfind("dropped closing tag", 0) == 0; });
    c.expect(static_cast<std::size_t>(closers) == expected.dropped_closers,
             id + " logged the wrong number of dropped closing tags");
  }
}

void bionic_fidelity(Check& c) {
  const auto rows = testing::compare_bolding(
      bionic_format(testing::read_data_file("bionic_source.txt"), BionicParams{3, 10}),
      testing::read_data_file("bionic_expected.md"));
  std::vector<std::string> mismatches;
  for (const auto& r : rows) {
    if (r.expected != r.actual) mismatches.push_back(r.word);
  }
  // Words where the printed example departs from any single prefix rule.
  const std::vector<std::string> known{"members",      "Jisoo",   "Jennie", "Rosé", "and",
                                       "performances", "diverse", "styles", "and"};
  c.expect(mismatches == known, "mismatching words differ from the enumerated deviations");
  const double agreement =
      rows.empty() ? 0.0
                   : static_cast<double>(rows.size() - mismatches.size()) / static_cast<double>(rows.size());
  c.expect(agreement >= 0.80, "agreement " + std::to_string(agreement) + " below 0.80");
  const std::vector<std::pair<int, int>> prefixes{{9, 5}, {7, 4}, {4, 2}, {3, 1}, {2, 1}};
  for (const auto& [n, b] : prefixes) {
    c.expect(bold_prefix_len(n, 3) == b, "prefix length of " + std::to_string(n) + " is not " +
                                             std::to_string(b));
  }
}

void prompt_golden_files(Check& c) {
  const std::string prompt = build_default_prompt();
  c.expect(prompt == testing::read_data_file("default_prompt.txt"), "default prompt differs from golden");
  c.expect(prompt.find("YOUR OUTPUT MUST KEEP THE CONTENT OF THE ARTICLE THE SAME AS THE ORIGINAL ONE") !=
               std::string::npos,
           "preservation rule missing");
  const std::string rater = build_rater_prompt("ORIGINAL ARTICLE", "ANSWER TO SCORE");
  c.expect(rater == testing::read_data_file("rater_prompt.txt"), "rater prompt differs from golden");
  c.expect(rater.find("Score: 6") != std::string::npos, "one-shot score missing");
}

void figure_fixture(Check& c) {
  const std::string source = testing::read_data_file("fig1_source.txt");
  auto backend = testing::scripted_backend({testing::read_data_file("fig1_annotated.html")});
  const auto result = annotate(source, PromptSpec{}, mock_config(), *backend);
  c.expect(result.report.passed, "replay did not pass verification");
  const auto strong = texts_of(result.document, AnnotationKind::Emphasis);
  for (const char* name : {"Jisoo", "Jennie", "Rosé", "Lisa"}) {
    c.expect(std::find(strong.begin(), strong.end(), name) != strong.end(),
             std::string("no emphasis on ") + name);
  }
  const auto marks = texts_of(result.document, AnnotationKind::Highlight);
  c.expect(std::any_of(marks.begin(), marks.end(),
                       [](const std::string& m) {
                         return m.find("gained global recognition and a strong fan following") !=
                                std::string::npos;
                       }),
           "no highlight containing the summary phrase");
  const std::string html = render_html(result.document);
  const auto body_start = html.find("<body>");
  const auto body_end = html.find("</body>");
  c.expect(body_start != std::string::npos && body_end != std::string::npos, "page has no body");
  if (body_start == std::string::npos || body_end == std::string::npos) return;
  const auto body = html.substr(body_start + 6, body_end - body_start - 6);
  const auto reparsed = parse_markup(body);
  c.expect(verify_preservation(source, reparsed).passed, "rendered page does not preserve the text");
  const auto mapped = project_spans(to_u32(source), reparsed.document);
  c.expect(testing::coverage(AnnotatedDocument(source, mapped)) == testing::coverage(result.document),
           "rendered page re-parses to a different span set");
}

void repair_loop(Check& c) {
  for (int retries : {0, 1, 2, 4}) {
    auto backend = testing::corrupting_backend();
    const auto result = annotate("the red pyramid of Djoser", PromptSpec{}, mock_config(retries), *backend);
    const std::string id = "max_retries=" + std::to_string(retries);
    c.expect(result.attempts == retries + 1 && backend->calls() == retries + 1,
             id + " made " + std::to_string(backend->calls()) + " attempts");
    c.expect(result.fallback_used, id + " did not fall back");
    c.expect(!result.report.diffs.empty(), id + " has an empty diff");
  }
  testing::FunctionBackend complies([](const ChatRequest& r, int call) {
    const std::string text = testing::first_user_message(r);
    return call == 0 ? "<strong>changed</strong>" : "<strong>" + text + "</strong>";
  });
  const auto result = annotate("Djoser ruled", PromptSpec{}, mock_config(), complies);
  c.expect(result.attempts == 2, "compliant second attempt took " + std::to_string(result.attempts));
  c.expect(result.report.passed && !result.fallback_used, "compliant second attempt did not pass");
}

void service_contract(Check& c) {
  const std::string html = testing::read_data_file("fig1_annotated.html");
  auto backend = std::make_shared<testing::FunctionBackend>(
      [html](const ChatRequest&, int) { return html; });
  testing::ServiceHarness svc(backend);
  int successes = 0;

  const auto health = svc.get("/health");
  c.expect(health && health->status == 200, "health is not 200");

  const json request{{"text", testing::read_data_file("fig1_source.txt")}};
  const auto res = svc.post("/api/annotate", request.dump());
  c.expect(res && res->status == 200, "annotate is not 200");
  if (res && res->status == 200) {
    ++successes;
    const json payload = json::parse(res->body);
    const auto job = svc.get("/api/jobs/" + payload["job_id"].get<std::string>());
    c.expect(job && job->status == 200 && json::parse(job->body)["result"] == payload,
             "stored job differs from the annotate response");
  }

  for (const std::string body : {"not json", "[]", R"({"text": 5})", R"({"mode": "default"})",
                                 R"({"text": "x", "mode": "wild"})"}) {
    const auto bad = svc.post("/api/annotate", body);
    c.expect(bad && bad->status == 400, "invalid body " + body + " is not 400");
  }
  for (const std::string body : {R"({"text": "x", "fixation": 0})", R"({"text": "x", "fixation": 6})",
                                 R"({"text": "x", "saccade": 0})", R"({"text": "x", "saccade": 21})"}) {
    const auto bad = svc.post("/api/bionic", body);
    c.expect(bad && bad->status == 400, "out-of-range bionic " + body + " is not 400");
  }
  const auto bionic = svc.post("/api/bionic", R"({"text": "served words", "fixation": 3, "saccade": 10})");
  c.expect(bionic && bionic->status == 200, "bionic is not 200");
  if (bionic && bionic->status == 200) ++successes;

  c.expect(svc.log_lines() == static_cast<std::size_t>(successes),
           "log has " + std::to_string(svc.log_lines()) + " lines for " + std::to_string(successes) +
               " successful requests");
}

void scorer(Check& c) {
  for (int n = 0; n <= 10; ++n) {
    const auto r = parse_score("Score: " + std::to_string(n) + "\nReason " + std::to_string(n) + ".");
    c.expect(r.score == n && r.rationale == "Reason " + std::to_string(n) + ".",
             "score " + std::to_string(n) + " not recovered");
  }
  bool rejected = false;
  try {
    parse_score("Score: 11\nToo high.");
  } catch (const std::exception&) {
    rejected = true;
  }
  c.expect(rejected, "score 11 accepted");

  std::istringstream in(testing::read_data_file("rater_prompt.txt"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  std::string reply;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    if (lines[i] == "Score: 6") reply = lines[i] + "\n" + lines[i + 1];
  }
  c.expect(!reply.empty(), "one-shot reply not found in the rater prompt");
  auto backend = testing::scripted_backend({reply});
  c.expect(score("ORIGINAL ARTICLE", "ANSWER TO SCORE", mock_config(), *backend).result.score == 6,
           "replayed one-shot did not score 6");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"preservation suite", preservation},
      {"whitelist fuzzing", whitelist_fuzzing},
      {"bionic fidelity", bionic_fidelity},
      {"prompt golden files", prompt_golden_files},
      {"figure fixture", figure_fixture},
      {"repair loop", repair_loop},
      {"service contract", service_contract},
      {"scorer", scorer},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check check;
    try {
      run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("unexpected exception: ") + e.what());
    }
    if (check.ok()) {
      std::printf("PASS %s\n", name.c_str());
    } else {
      std::printf("FAIL %s: %s\n", name.c_str(), check.summary().c_str());
      ++failed;
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
