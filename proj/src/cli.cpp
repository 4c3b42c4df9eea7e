#include "larf/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "larf/annotator.hpp"
#include "larf/bionic.hpp"
#include "larf/errors.hpp"
#include "larf/json_io.hpp"
#include "larf/render.hpp"
#include "larf/scorer.hpp"
#include "larf/service.hpp"
#include "larf/version.hpp"

namespace larf {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_input(const std::string& path, std::istream& stdin_stream) {
  if (path.empty() || path == "-") return read_all(stdin_stream);
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot read " + path);
  return read_all(file);
}

void write_output(const std::string& path, const std::string& data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path);
  file << data;
  if (!file) throw IoError("cannot write " + path);
}

struct StyleFlags {
  double font_scale = 1.0;
  double letter_spacing = 0.0;
  double line_spacing = 1.5;
  std::string highlight = "yellow";
  std::string theme = "light";

  void add_to(CLI::App& app) {
    app.add_option("--font-scale", font_scale, "Font size multiplier (> 0)");
    app.add_option("--letter-spacing", letter_spacing, "Extra letter spacing in em (>= 0)");
    app.add_option("--line-spacing", line_spacing, "Line height multiplier (>= 1)");
    app.add_option("--highlight", highlight, "Highlight colour: yellow, green, blue, pink");
    app.add_option("--theme", theme, "light or dark")->check(CLI::IsMember({"light", "dark"}));
  }

  RenderStyle style() const {
    RenderStyle s;
    s.font_scale = font_scale;
    s.letter_spacing = letter_spacing;
    s.line_spacing = line_spacing;
    s.highlight_token = highlight;
    s.theme = theme == "dark" ? Theme::Dark : Theme::Light;
    return s;
  }
};

std::string format_document(const AnnotatedDocument& doc, const std::string& format,
                            const RenderStyle& style) {
  if (format == "json") return dump_json(json(doc)) + "\n";
  if (format == "ansi") return render_terminal(doc) + "\n";
  return render_html(doc, style);
}

PromptCategory parse_category(const std::string& arg) {
  const auto eq = arg.rfind('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("--category expects \"description=tag\", got \"" + arg + "\"");
  }
  const std::string tag = arg.substr(eq + 1);
  const auto kind = kind_from_tag(tag);
  if (!kind) throw UsageError("category tag must be strong, mark or u, got \"" + tag + "\"");
  return {arg.substr(0, eq), *kind};
}

std::vector<std::string> parse_answers(const std::string& content) {
  std::vector<std::string> answers;
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize(line).empty()) continue;
    const char first = line[line.find_first_not_of(" \t")];
    if (first == '{' || first == '"') {
      const json j = json::parse(line, nullptr, false);
      if (j.is_string()) {
        answers.push_back(j.get<std::string>());
        continue;
      }
      if (j.is_object() && j.contains("answer") && j["answer"].is_string()) {
        answers.push_back(j["answer"].get<std::string>());
        continue;
      }
      throw FormatError("answers line " + std::to_string(line_no) +
                        ": expected a JSON string or an object with an \"answer\" string");
    }
    answers.push_back(line);
  }
  return answers;
}

std::atomic<Service*> g_serving{nullptr};

extern "C" void handle_stop_signal(int) {
  if (Service* s = g_serving.load()) s->stop();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err, std::shared_ptr<ChatBackend> backend) {
  CLI::App app{"Annotate text for easier reading, with a bionic-reading baseline, an HTML "
               "renderer, an answer scorer and an HTTP service.",
               "larf"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  // annotate
  std::string ann_input, ann_out, ann_format = "html", ann_mode = "default", ann_log;
  std::vector<std::string> ann_categories;
  double ann_temperature = 0.0;
  int ann_max_tokens = 2048;
  int ann_retries = -1;
  StyleFlags ann_style;
  auto* annotate_cmd = app.add_subcommand("annotate", "Annotate text with strong/mark/u markup");
  annotate_cmd->add_option("input", ann_input, "Input text file (default: stdin)");
  annotate_cmd->add_option("--mode", ann_mode, "default, custom or offline")
      ->check(CLI::IsMember({"default", "custom", "offline"}));
  annotate_cmd->add_option("--category", ann_categories,
                           "Custom-mode category as \"description=tag\" (tag: strong, mark, u); "
                           "repeatable");
  annotate_cmd->add_option("--out", ann_out, "Output file (default: stdout)");
  annotate_cmd->add_option("--format", ann_format, "html, json or ansi")
      ->check(CLI::IsMember({"html", "json", "ansi"}));
  annotate_cmd->add_option("--log", ann_log, "Append job detail (replies, report) as JSONL");
  annotate_cmd->add_option("--temperature", ann_temperature, "Sampling temperature (>= 0)");
  annotate_cmd->add_option("--max-output-tokens", ann_max_tokens, "Reply length limit");
  annotate_cmd->add_option("--max-retries", ann_retries,
                           "Repair attempts per chunk (default 2)");
  ann_style.add_to(*annotate_cmd);

  // bionic
  std::string bio_input, bio_out, bio_format = "html";
  BionicParams bio_params;
  StyleFlags bio_style;
  auto* bionic_cmd = app.add_subcommand("bionic", "Bionic-reading baseline: bold word prefixes");
  bionic_cmd->add_option("input", bio_input, "Input text file (default: stdin)");
  bionic_cmd->add_option("--fixation", bio_params.fixation, "1..5 (default 3)");
  bionic_cmd->add_option("--saccade", bio_params.saccade, "10, 20, 30, 40 or 50 (default 10)");
  bionic_cmd->add_option("--out", bio_out, "Output file (default: stdout)");
  bionic_cmd->add_option("--format", bio_format, "html, json or ansi")
      ->check(CLI::IsMember({"html", "json", "ansi"}));
  bio_style.add_to(*bionic_cmd);

  // render
  std::string ren_input, ren_out, ren_format = "html";
  StyleFlags ren_style;
  auto* render_cmd = app.add_subcommand("render", "Render a JSON document as HTML or ANSI text");
  render_cmd->add_option("input", ren_input, "Document JSON file (default: stdin)");
  render_cmd->add_option("--out", ren_out, "Output file (default: stdout)");
  render_cmd->add_option("--format", ren_format, "html or ansi")
      ->check(CLI::IsMember({"html", "ansi"}));
  ren_style.add_to(*render_cmd);

  // score
  std::string sc_article, sc_answers, sc_out;
  auto* score_cmd = app.add_subcommand("score", "Rate answers 0-10 against an article");
  score_cmd->add_option("--article", sc_article, "Article text file")->required();
  score_cmd->add_option("--answers", sc_answers,
                        "Answers file: one answer per line, or JSONL with \"answer\" fields")
      ->required();
  score_cmd->add_option("--out", sc_out, "Output JSONL file (default: stdout)");

  // serve
  std::string srv_listen, srv_log;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP JSON API");
  serve_cmd->add_option("--listen", srv_listen, "host:port (default LARF_LISTEN_ADDR or 127.0.0.1:8765)");
  serve_cmd->add_option("--job-log", srv_log, "Job log path (default LARF_JOB_LOG or ./larf-jobs.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  const auto chat_backend = [&](const LLMConfig& config) {
    return backend ? backend : make_http_backend(config);
  };

  try {
    if (*annotate_cmd) {
      PromptSpec prompt;
      if (ann_mode == "custom") {
        if (ann_categories.empty()) throw UsageError("--mode custom needs at least one --category");
        std::vector<PromptCategory> categories;
        for (const auto& c : ann_categories) categories.push_back(parse_category(c));
        prompt = PromptSpec::custom(std::move(categories));
      } else if (!ann_categories.empty()) {
        throw UsageError("--category is only valid with --mode custom");
      }
      prompt.temperature = ann_temperature;
      prompt.max_output_tokens = ann_max_tokens;
      prompt.validate();
      const RenderStyle style = ann_style.style();
      style.validate();

      const std::string text = read_input(ann_input, in);
      if (normalize(text).empty()) throw EmptyInput("input text is empty");

      AnnotationResult result;
      json log_entry;
      if (ann_mode == "offline") {
        result.document = offline_annotate(text);
        result.report = verify_preservation(text, parse_markup(emit_markup(result.document)));
      } else {
        LLMConfig config = LLMConfig::from_env();
        if (ann_retries >= 0) config.max_retries = ann_retries;
        log_entry["system_prompt"] = build_system_prompt(prompt);
        result = annotate(text, prompt, config, *chat_backend(config));
      }
      const std::string rendered = format_document(result.document, ann_format, style);

      if (!ann_log.empty()) {
        log_entry["mode"] = ann_mode;
        log_entry["created_at"] = utc_timestamp_now();
        log_entry["report"] = result.report;
        log_entry["attempts"] = result.attempts;
        log_entry["fallback_used"] = result.fallback_used;
        log_entry["raw_replies"] = result.raw_replies;
        json exchanges = json::array();
        for (const auto& e : result.exchanges) {
          exchanges.push_back({{"request", redact_secrets(e.request)},
                               {"response", redact_secrets(e.response)}});
        }
        log_entry["llm_exchanges"] = std::move(exchanges);
        std::ofstream log(ann_log, std::ios::app | std::ios::binary);
        if (!log) throw IoError("cannot write " + ann_log);
        log << dump_json(log_entry) << '\n';
      }
      write_output(ann_out, rendered, out);
      if (result.fallback_used) {
        err << "larf: annotations did not preserve the text after "
            << result.attempts << " attempt(s); wrote the plain text instead\n";
        return kExitFallback;
      }
      return kExitOk;
    }

    if (*bionic_cmd) {
      bio_params.validate();
      const RenderStyle style = bio_style.style();
      style.validate();
      const AnnotatedDocument doc = bionic_format(read_input(bio_input, in), bio_params);
      write_output(bio_out, format_document(doc, bio_format, style), out);
      return kExitOk;
    }

    if (*render_cmd) {
      const RenderStyle style = ren_style.style();
      style.validate();
      const AnnotatedDocument doc = document_from_json_text(read_input(ren_input, in));
      write_output(ren_out, format_document(doc, ren_format, style), out);
      return kExitOk;
    }

    if (*score_cmd) {
      std::ifstream article_file(sc_article, std::ios::binary);
      if (!article_file) throw IoError("cannot read " + sc_article);
      const std::string article = read_all(article_file);
      std::ifstream answers_file(sc_answers, std::ios::binary);
      if (!answers_file) throw IoError("cannot read " + sc_answers);
      const auto answers = parse_answers(read_all(answers_file));
      if (answers.empty()) throw EmptyInput("no answers to score");

      const LLMConfig config = LLMConfig::from_env();
      const auto outcomes = score_batch(article, answers, config, *chat_backend(config));
      std::string jsonl;
      for (const auto& o : outcomes) jsonl += dump_json(json(o.result)) + "\n";
      write_output(sc_out, jsonl, out);
      return kExitOk;
    }

    if (*serve_cmd) {
      ServiceConfig config = ServiceConfig::from_env();
      if (!srv_listen.empty()) config.set_listen_addr(srv_listen);
      if (!srv_log.empty()) config.job_log = srv_log;
      Service service(config, backend, nullptr);
      const int port = service.bind();
      if (port < 0) {
        err << "larf: cannot listen on " << config.host << ":" << config.port << "\n";
        return kExitFailure;
      }
      err << "larf: listening on http://" << config.host << ":" << port << "\n";
      err.flush();
      g_serving = &service;
      const auto previous_int = std::signal(SIGINT, handle_stop_signal);
      const auto previous_term = std::signal(SIGTERM, handle_stop_signal);
      service.listen_after_bind();
      g_serving = nullptr;
      std::signal(SIGINT, previous_int);
      std::signal(SIGTERM, previous_term);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "larf: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RangeError& e) {
    err << "larf: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EmptyCategories& e) {
    err << "larf: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EmptyInput& e) {
    err << "larf: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    err << "larf: " << e.what() << "\n";
    return kExitUpstream;
  } catch (const AuthError& e) {
    err << "larf: " << e.what() << "\n";
    return kExitUpstream;
  } catch (const std::exception& e) {
    err << "larf: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace larf
