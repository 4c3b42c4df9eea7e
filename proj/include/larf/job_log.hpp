#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "larf/llm.hpp"

namespace larf {

enum class JobKind { Annotate, Bionic, Score };
enum class JobStatus { Succeeded, FallbackUsed, Failed };

std::string_view to_string(JobKind kind);
std::string_view to_string(JobStatus status);
std::optional<JobKind> parse_job_kind(std::string_view name);

struct JobRecord {
  std::string id;
  std::string created_at;  // ISO 8601 UTC, millisecond precision
  JobKind kind = JobKind::Annotate;
  nlohmann::json request;
  nlohmann::json result;
  std::vector<ChatExchange> llm_exchanges;
  JobStatus status = JobStatus::Succeeded;
};

nlohmann::json to_json(const JobRecord& record);
// Throws FormatError.
JobRecord job_from_json(const nlohmann::json& j);

// Random 128-bit hex identifier.
std::string new_job_id();
std::string utc_timestamp_now();

// Removes credential-like members (authorization, api_key, ...) at any depth.
nlohmann::json redact_secrets(nlohmann::json j);

// Append-only store of job records.
class JobStore {
 public:
  virtual ~JobStore() = default;
  // Throws std::invalid_argument on a duplicate id.
  virtual void append(JobRecord record) = 0;
  virtual std::optional<JobRecord> get(const std::string& id) const = 0;
  // Newest first, optionally filtered by kind.
  virtual std::vector<JobRecord> list(std::optional<JobKind> kind, std::size_t offset,
                                      std::size_t limit) const = 0;
  virtual std::size_t count(std::optional<JobKind> kind) const = 0;
};

// In-memory index over a JSONL file, one record per line. Existing lines are
// loaded on construction; appends are serialized and flushed per record.
class JsonlJobStore : public JobStore {
 public:
  explicit JsonlJobStore(std::filesystem::path path);

  void append(JobRecord record) override;
  std::optional<JobRecord> get(const std::string& id) const override;
  std::vector<JobRecord> list(std::optional<JobKind> kind, std::size_t offset,
                              std::size_t limit) const override;
  std::size_t count(std::optional<JobKind> kind) const override;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<JobRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace larf
