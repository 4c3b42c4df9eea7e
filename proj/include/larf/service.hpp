#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "larf/job_log.hpp"
#include "larf/llm.hpp"

namespace httplib {
class Server;
}

namespace larf {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string job_log = "./larf-jobs.jsonl";
  std::string ui_origin;  // CORS origin allowed to call the API; empty = none
  LLMConfig llm;

  // LARF_LISTEN_ADDR (host:port), LARF_JOB_LOG, LARF_UI_ORIGIN plus the
  // LLM variables read by LLMConfig::from_env.
  static ServiceConfig from_env();
  // Parses "host:port"; throws RangeError.
  void set_listen_addr(const std::string& addr);
};

// JSON API over the annotator, bionic formatter, renderer and scorer. Every
// request that produces a result is appended to the job store; error bodies
// are {"code", "message"}.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<ChatBackend> backend,
          std::shared_ptr<JobStore> store);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the configured address (port 0 picks a free port) and returns
  // the bound port, or -1 on failure.
  int bind();
  // Serves until stop(); call after bind().
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

  JobStore& store() { return *store_; }

 private:
  void register_routes();

  ServiceConfig config_;
  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<JobStore> store_;
  std::unique_ptr<httplib::Server> server_;
};

// Builds the default backend (HTTP client with a shared in-flight cap).
std::shared_ptr<ChatBackend> make_http_backend(const LLMConfig& config);

}  // namespace larf
