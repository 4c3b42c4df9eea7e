#include "larf/service.hpp"

#include <cstdlib>
#include <functional>

#include "httplib.h"
#include "larf/annotator.hpp"
#include "larf/bionic.hpp"
#include "larf/errors.hpp"
#include "larf/json_io.hpp"
#include "larf/render.hpp"
#include "larf/scorer.hpp"
#include "larf/version.hpp"

namespace larf {

using nlohmann::json;

void ServiceConfig::set_listen_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw RangeError("listen address must be host:port, got '" + addr + "'");
  }
  int parsed = -1;
  try {
    std::size_t used = 0;
    parsed = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) parsed = -1;
  } catch (const std::exception&) {
    parsed = -1;
  }
  if (parsed < 0 || parsed > 65535) throw RangeError("invalid port in '" + addr + "'");
  host = addr.substr(0, colon);
  port = parsed;
}

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig config;
  config.llm = LLMConfig::from_env();
  if (const char* v = std::getenv("LARF_LISTEN_ADDR"); v && *v) config.set_listen_addr(v);
  if (const char* v = std::getenv("LARF_JOB_LOG"); v && *v) config.job_log = v;
  if (const char* v = std::getenv("LARF_UI_ORIGIN"); v && *v) config.ui_origin = v;
  return config;
}

std::shared_ptr<ChatBackend> make_http_backend(const LLMConfig& config) {
  return std::make_shared<HttpChatBackend>(
      config, std::make_shared<InflightLimiter>(config.max_in_flight));
}

namespace {

struct ApiError {
  int status;
  std::string code;
  std::string message;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(dump_json(body), "application/json");
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded()) throw ApiError{400, "invalid_body", "request body is not valid JSON"};
  if (!body.is_object()) throw ApiError{400, "invalid_body", "request body must be a JSON object"};
  return body;
}

std::string require_string(const json& body, const char* field, bool allow_empty = true) {
  if (!body.contains(field) || !body[field].is_string()) {
    throw ApiError{400, "invalid_body", std::string("'") + field + "' must be a string"};
  }
  std::string value = body[field].get<std::string>();
  if (!allow_empty && normalize(value).empty()) {
    throw ApiError{422, "empty_text", std::string("'") + field + "' is empty"};
  }
  return value;
}

std::optional<long long> optional_int(const json& body, const char* field) {
  if (!body.contains(field) || body[field].is_null()) return std::nullopt;
  if (!body[field].is_number_integer()) {
    throw ApiError{400, "invalid_body", std::string("'") + field + "' must be an integer"};
  }
  return body[field].get<long long>();
}

PromptSpec prompt_from_body(const json& body, const std::string& mode) {
  PromptSpec spec;
  if (mode == "custom") {
    spec.mode = PromptSpec::Mode::Custom;
    if (!body.contains("categories") || !body["categories"].is_array()) {
      throw ApiError{400, "invalid_body", "custom mode needs a 'categories' array"};
    }
    for (const auto& c : body["categories"]) {
      if (!c.is_object() || !c.contains("description") || !c["description"].is_string()) {
        throw ApiError{400, "invalid_body", "each category needs a 'description' string"};
      }
      const std::string tag = c.contains("tag") && c["tag"].is_string()
                                  ? c["tag"].get<std::string>()
                                  : c.value("kind", std::string("strong"));
      const auto kind = tag == "b" ? std::optional(AnnotationKind::Emphasis) : kind_from_tag(tag);
      if (!kind) throw ApiError{400, "invalid_body", "unknown category tag '" + tag + "'"};
      spec.categories.push_back({c["description"].get<std::string>(), *kind});
    }
    if (spec.categories.empty()) {
      throw ApiError{400, "empty_categories", "custom mode needs at least one category"};
    }
  } else if (body.contains("categories") && !body["categories"].empty()) {
    throw ApiError{400, "invalid_body", "categories are only accepted in custom mode"};
  }
  if (body.contains("temperature") && !body["temperature"].is_null()) {
    if (!body["temperature"].is_number() || body["temperature"].get<double>() < 0) {
      throw ApiError{400, "out_of_range", "'temperature' must be a number >= 0"};
    }
    spec.temperature = body["temperature"].get<double>();
  }
  if (const auto tokens = optional_int(body, "max_output_tokens")) {
    if (*tokens <= 0 || *tokens > 1'000'000) {
      throw ApiError{400, "out_of_range", "'max_output_tokens' must be positive"};
    }
    spec.max_output_tokens = static_cast<int>(*tokens);
  }
  return spec;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

}  // namespace

Service::Service(ServiceConfig config, std::shared_ptr<ChatBackend> backend,
                 std::shared_ptr<JobStore> store)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      store_(std::move(store)),
      server_(std::make_unique<httplib::Server>()) {
  config_.llm.validate();
  if (!backend_) backend_ = make_http_backend(config_.llm);
  if (!store_) store_ = std::make_shared<JsonlJobStore>(config_.job_log);
  register_routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (config_.port == 0) return server_->bind_to_any_port(config_.host);
  return server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
}

bool Service::listen_after_bind() { return server_->listen_after_bind(); }
void Service::stop() {
  if (server_->is_running()) server_->stop();
}
bool Service::is_running() const { return server_->is_running(); }
void Service::wait_until_ready() const { server_->wait_until_ready(); }

void Service::register_routes() {
  auto& srv = *server_;

  // Wraps a handler so every failure becomes a {code, message} body.
  const auto guarded = [](Handler inner) -> Handler {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      try {
        inner(req, res);
      } catch (const ApiError& e) {
        send_json(res, e.status, {{"code", e.code}, {"message", e.message}});
      } catch (const AuthError& e) {
        send_json(res, 401, {{"code", e.code()}, {"message", e.what()}});
      } catch (const TransportError& e) {
        send_json(res, 502, {{"code", e.code()}, {"message", e.what()}});
      } catch (const NoScoreFound& e) {
        send_json(res, 502, {{"code", e.code()}, {"message", e.what()}});
      } catch (const ScoreOutOfRange& e) {
        send_json(res, 502, {{"code", e.code()}, {"message", e.what()}});
      } catch (const EmptyInput& e) {
        send_json(res, 422, {{"code", "empty_text"}, {"message", e.what()}});
      } catch (const Error& e) {
        send_json(res, 400, {{"code", e.code()}, {"message", e.what()}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"code", "internal_error"}, {"message", e.what()}});
      }
    };
  };

  // Records a job that failed upstream, then rethrows for the error body.
  const auto record_failure = [this](JobKind kind, const json& request, const Error& e) {
    JobRecord record;
    record.id = new_job_id();
    record.created_at = utc_timestamp_now();
    record.kind = kind;
    record.request = request;
    record.result = {{"code", e.code()}, {"message", e.what()}};
    record.status = JobStatus::Failed;
    store_->append(std::move(record));
  };

  if (!config_.ui_origin.empty()) {
    const std::string origin = config_.ui_origin;
    srv.set_default_headers({{"Access-Control-Allow-Origin", origin},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Vary", "Origin"}});
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
  }

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"version", kVersion}});
  });

  srv.Post("/api/annotate", guarded([this, record_failure](const httplib::Request& req,
                                                           httplib::Response& res) {
    const json body = parse_body(req);
    const std::string text = require_string(body, "text");
    const std::string mode = body.value("mode", std::string("default"));
    if (mode != "default" && mode != "custom" && mode != "offline") {
      throw ApiError{400, "invalid_body", "'mode' must be default, custom or offline"};
    }
    const PromptSpec prompt = prompt_from_body(body, mode);
    if (normalize(text).empty()) throw ApiError{422, "empty_text", "'text' is empty"};

    AnnotationResult result;
    if (mode == "offline") {
      result.document = offline_annotate(text);
      result.report = verify_preservation(text, parse_markup(emit_markup(result.document)));
    } else {
      try {
        result = annotate(text, prompt, config_.llm, *backend_);
      } catch (const TransportError& e) {
        record_failure(JobKind::Annotate, body, e);
        throw;
      } catch (const AuthError& e) {
        record_failure(JobKind::Annotate, body, e);
        throw;
      }
    }

    JobRecord record;
    record.id = new_job_id();
    record.created_at = utc_timestamp_now();
    record.kind = JobKind::Annotate;
    record.request = body;
    record.status = result.fallback_used ? JobStatus::FallbackUsed : JobStatus::Succeeded;
    record.llm_exchanges = result.exchanges;
    if (mode != "offline") record.request["system_prompt"] = build_system_prompt(prompt);
    record.result = {{"document", result.document},
                     {"report", result.report},
                     {"html", render_html(result.document)},
                     {"job_id", record.id},
                     {"status", to_string(record.status)},
                     {"attempts", result.attempts},
                     {"fallback_used", result.fallback_used},
                     {"raw_replies", result.raw_replies}};
    const json payload = record.result;
    store_->append(std::move(record));
    send_json(res, 200, payload);
  }));

  srv.Post("/api/bionic", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string text = require_string(body, "text");
    BionicParams params;
    if (const auto f = optional_int(body, "fixation")) {
      if (*f < 1 || *f > 5) throw ApiError{400, "out_of_range", "'fixation' must be in [1,5]"};
      params.fixation = static_cast<int>(*f);
    }
    if (const auto s = optional_int(body, "saccade")) {
      if (*s < 10 || *s > 50 || *s % 10 != 0) {
        throw ApiError{400, "out_of_range", "'saccade' must be one of 10,20,30,40,50"};
      }
      params.saccade = static_cast<int>(*s);
    }
    const AnnotatedDocument doc = bionic_format(text, params);

    JobRecord record;
    record.id = new_job_id();
    record.created_at = utc_timestamp_now();
    record.kind = JobKind::Bionic;
    record.request = body;
    record.result = {{"document", doc},
                     {"html", render_html(doc)},
                     {"job_id", record.id},
                     {"bolded_words", doc.spans().size()},
                     {"fixation", params.fixation},
                     {"saccade", params.saccade}};
    const json payload = record.result;
    store_->append(std::move(record));
    send_json(res, 200, payload);
  }));

  srv.Post("/api/score", guarded([this, record_failure](const httplib::Request& req,
                                                        httplib::Response& res) {
    const json body = parse_body(req);
    const std::string article = require_string(body, "article", false);
    const std::string answer = require_string(body, "answer", false);
    const auto adjusted = optional_int(body, "adjusted_score");
    if (adjusted && (*adjusted < 0 || *adjusted > 10)) {
      throw ApiError{400, "out_of_range", "'adjusted_score' must be in [0,10]"};
    }

    ScoreOutcome outcome;
    try {
      outcome = score(article, answer, config_.llm, *backend_);
    } catch (const Error& e) {
      record_failure(JobKind::Score, body, e);
      throw;
    }

    JobRecord record;
    record.id = new_job_id();
    record.created_at = utc_timestamp_now();
    record.kind = JobKind::Score;
    record.request = body;
    record.llm_exchanges = {outcome.exchange};
    record.result = outcome.result;
    record.result["job_id"] = record.id;
    if (adjusted) record.result["adjusted_score"] = *adjusted;
    const json payload = record.result;
    store_->append(std::move(record));
    send_json(res, 200, payload);
  }));

  srv.Get(R"(/api/jobs/([0-9A-Za-z_-]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto record = store_->get(req.matches[1].str());
            if (!record) throw ApiError{404, "not_found", "no job with id " + req.matches[1].str()};
            send_json(res, 200, to_json(*record));
          }));

  srv.Get("/api/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::optional<JobKind> kind;
    if (req.has_param("kind")) {
      kind = parse_job_kind(req.get_param_value("kind"));
      if (!kind) throw ApiError{400, "invalid_query", "'kind' must be annotate, bionic or score"};
    }
    const auto read_count = [&](const char* name, std::size_t fallback) -> std::size_t {
      if (!req.has_param(name)) return fallback;
      try {
        const long long v = std::stoll(req.get_param_value(name));
        if (v < 0) throw std::out_of_range(name);
        return static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw ApiError{400, "invalid_query", std::string("'") + name + "' must be a non-negative integer"};
      }
    };
    const std::size_t offset = read_count("offset", 0);
    const std::size_t limit = std::min<std::size_t>(read_count("limit", 50), 500);
    json jobs = json::array();
    for (const auto& r : store_->list(kind, offset, limit)) jobs.push_back(to_json(r));
    send_json(res, 200, {{"jobs", std::move(jobs)},
                         {"total", store_->count(kind)},
                         {"offset", offset},
                         {"limit", limit}});
  }));

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 404 ? "not_found" : "http_error";
    send_json(res, res.status, {{"code", code}, {"message", "HTTP " + std::to_string(res.status)}});
  });
}

}  // namespace larf
