#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace larf {

struct LLMConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name;  // no default model is assumed
  std::string api_key;
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 2;
  int max_in_flight = 4;

  // Reads LARF_API_BASE, LARF_MODEL and LARF_API_KEY, keeping the defaults
  // above for unset variables.
  static LLMConfig from_env();
  // Throws RangeError for negative retries or a non-positive timeout.
  void validate() const;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 2048;
};

// Request body in the common chat-completion schema.
nlohmann::json to_wire(const ChatRequest& request);

struct ChatReply {
  std::string content;
  nlohmann::json raw;  // full response body
};

// One request/response pair, as written to the job log. Never holds the key.
struct ChatExchange {
  nlohmann::json request;
  nlohmann::json response;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Throws TransportError or AuthError.
  virtual ChatReply complete(const ChatRequest& request) = 0;
};

// Bounds concurrent requests to the endpoint; shared by every caller that
// talks to the same backend.
class InflightLimiter {
 public:
  explicit InflightLimiter(int capacity);

  class Permit {
   public:
    explicit Permit(InflightLimiter& owner) : owner_(&owner) { owner_->acquire(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    ~Permit() { owner_->release(); }

   private:
    InflightLimiter* owner_;
  };

  int capacity() const { return capacity_; }
  int in_flight() const;

 private:
  void acquire();
  void release();

  const int capacity_;
  int used_ = 0;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
};

// POSTs to {base_url}/chat/completions. HTTP 401/403 become AuthError;
// connection failures, 429 and 5xx are retried up to max_retries times and
// then become TransportError.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(LLMConfig config, std::shared_ptr<InflightLimiter> limiter = nullptr);
  ChatReply complete(const ChatRequest& request) override;

 private:
  LLMConfig config_;
  std::shared_ptr<InflightLimiter> limiter_;
  std::string origin_;     // scheme://host[:port]
  std::string path_base_;  // path prefix, e.g. "/v1"
};

}  // namespace larf
