#include "support/mock_backend.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace larf::testing {

std::string read_data_file(const std::string& name) {
  const std::string path = std::string(LARF_TEST_DATA_DIR) + "/" + name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing test data file " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ChatReply FunctionBackend::complete(const ChatRequest& request) {
  int index = 0;
  {
    std::lock_guard lock(mutex_);
    index = static_cast<int>(requests_.size());
    requests_.push_back(request);
  }
  ChatReply reply;
  reply.content = fn_(request, index);
  reply.raw = nlohmann::json::parse(MockChatServer::completion_body(reply.content));
  return reply;
}

int FunctionBackend::calls() const {
  std::lock_guard lock(mutex_);
  return static_cast<int>(requests_.size());
}

std::vector<ChatRequest> FunctionBackend::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::string first_user_message(const ChatRequest& request) {
  for (const auto& m : request.messages) {
    if (m.role == "user") return m.content;
  }
  return {};
}

std::unique_ptr<FunctionBackend> scripted_backend(std::vector<std::string> replies) {
  return std::make_unique<FunctionBackend>(
      [replies = std::move(replies)](const ChatRequest&, int index) {
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(index), replies.size() - 1);
        return replies[i];
      });
}

std::unique_ptr<FunctionBackend> echo_backend() {
  return std::make_unique<FunctionBackend>(
      [](const ChatRequest& request, int) { return first_user_message(request); });
}

std::unique_ptr<FunctionBackend> corrupting_backend() {
  return std::make_unique<FunctionBackend>([](const ChatRequest& request, int) {
    std::string text = first_user_message(request);
    // Replace the first word with a different one.
    const auto start = text.find_first_not_of(" \t\r\n");
    if (start == std::string::npos) return std::string("corrupted");
    auto end = text.find_first_of(" \t\r\n", start);
    if (end == std::string::npos) end = text.size();
    text.replace(start, end - start, "CORRUPTED");
    return text;
  });
}

MockChatServer::MockChatServer(Handler handler) {
  server_.Post("/v1/chat/completions",
               [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
                 {
                   std::lock_guard lock(mutex_);
                   ++hits_;
                   auth_.push_back(req.get_header_value("Authorization"));
                 }
                 const auto body = nlohmann::json::parse(req.body, nullptr, false);
                 auto [status, content] = handler(body, req);
                 res.status = status;
                 res.set_content(content, "application/json");
               });
  port_ = server_.bind_to_any_port("127.0.0.1");
  if (port_ < 0) throw std::runtime_error("mock chat server failed to bind");
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

MockChatServer::~MockChatServer() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

int MockChatServer::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::vector<std::string> MockChatServer::authorization_headers() const {
  std::lock_guard lock(mutex_);
  return auth_;
}

std::string MockChatServer::completion_body(const std::string& content) {
  return nlohmann::json{{"id", "chatcmpl-mock"},
                        {"object", "chat.completion"},
                        {"choices",
                         {{{"index", 0},
                           {"message", {{"role", "assistant"}, {"content", content}}},
                           {"finish_reason", "stop"}}}}}
      .dump();
}

}  // namespace larf::testing
