#include "larf/llm.hpp"

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "larf/errors.hpp"

namespace larf {

LLMConfig LLMConfig::from_env() {
  LLMConfig config;
  if (const char* v = std::getenv("LARF_API_BASE"); v && *v) config.base_url = v;
  if (const char* v = std::getenv("LARF_MODEL"); v && *v) config.model_name = v;
  if (const char* v = std::getenv("LARF_API_KEY"); v && *v) config.api_key = v;
  return config;
}

void LLMConfig::validate() const {
  if (max_retries < 0) throw RangeError("max_retries must be >= 0");
  if (request_timeout.count() <= 0) throw RangeError("request_timeout must be positive");
  if (max_in_flight < 1) throw RangeError("max_in_flight must be >= 1");
}

nlohmann::json to_wire(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  nlohmann::json body{{"messages", std::move(messages)},
                      {"temperature", request.temperature},
                      {"max_tokens", request.max_tokens}};
  if (!request.model.empty()) body["model"] = request.model;
  return body;
}

InflightLimiter::InflightLimiter(int capacity) : capacity_(capacity < 1 ? 1 : capacity) {}

int InflightLimiter::in_flight() const {
  std::lock_guard lock(mutex_);
  return used_;
}

void InflightLimiter::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return used_ < capacity_; });
  ++used_;
}

void InflightLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --used_;
  }
  cv_.notify_one();
}

HttpChatBackend::HttpChatBackend(LLMConfig config, std::shared_ptr<InflightLimiter> limiter)
    : config_(std::move(config)), limiter_(std::move(limiter)) {
  config_.validate();
  if (!limiter_) limiter_ = std::make_shared<InflightLimiter>(config_.max_in_flight);
  const std::string& url = config_.base_url;
  const auto scheme_end = url.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  origin_ = path_start == std::string::npos ? url : url.substr(0, path_start);
  path_base_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_base_.empty() && path_base_.back() == '/') path_base_.pop_back();
}

ChatReply HttpChatBackend::complete(const ChatRequest& request) {
  const std::string body = to_wire(request).dump();
  const std::string path = path_base_ + "/chat/completions";
  std::string last_error;

  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));

    httplib::Result result;
    {
      InflightLimiter::Permit permit(*limiter_);
      httplib::Client client(origin_);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
          config_.request_timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      httplib::Headers headers;
      if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
      }
      result = client.Post(path, headers, body, "application/json");
    }

    if (!result) {
      last_error = "request to " + origin_ + path + " failed: " + httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      throw AuthError("endpoint rejected the API key (HTTP " + std::to_string(status) + ")");
    }
    if (status == 429 || status >= 500) {
      last_error = "endpoint returned HTTP " + std::to_string(status);
      continue;
    }
    if (status != 200) {
      throw TransportError("endpoint returned HTTP " + std::to_string(status) + ": " +
                           result->body.substr(0, 200));
    }
    auto parsed = nlohmann::json::parse(result->body, nullptr, false);
    if (parsed.is_discarded()) throw TransportError("endpoint returned malformed JSON");
    try {
      ChatReply reply;
      reply.content = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
      reply.raw = std::move(parsed);
      return reply;
    } catch (const nlohmann::json::exception&) {
      throw TransportError("response has no choices[0].message.content");
    }
  }
  throw TransportError(last_error);
}

}  // namespace larf
