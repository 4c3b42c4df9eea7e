#include "larf/job_log.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>

#include "larf/errors.hpp"
#include "larf/json_io.hpp"

namespace larf {

using nlohmann::json;

std::string_view to_string(JobKind kind) {
  switch (kind) {
    case JobKind::Annotate: return "annotate";
    case JobKind::Bionic: return "bionic";
    case JobKind::Score: return "score";
  }
  return "annotate";
}

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::Succeeded: return "succeeded";
    case JobStatus::FallbackUsed: return "fallback_used";
    case JobStatus::Failed: return "failed";
  }
  return "failed";
}

std::optional<JobKind> parse_job_kind(std::string_view name) {
  for (JobKind k : {JobKind::Annotate, JobKind::Bionic, JobKind::Score}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

std::optional<JobStatus> parse_job_status(std::string_view name) {
  for (JobStatus s : {JobStatus::Succeeded, JobStatus::FallbackUsed, JobStatus::Failed}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool is_secret_key(const std::string& key) {
  std::string lower;
  for (char c : key) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "authorization" || lower == "api_key" || lower == "apikey" ||
         lower == "x-api-key";
}

}  // namespace

json redact_secrets(json j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (is_secret_key(it.key())) {
        it = j.erase(it);
      } else {
        *it = redact_secrets(std::move(*it));
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) v = redact_secrets(std::move(v));
  }
  return j;
}

json to_json(const JobRecord& record) {
  json exchanges = json::array();
  for (const auto& e : record.llm_exchanges) {
    exchanges.push_back({{"request", redact_secrets(e.request)},
                         {"response", redact_secrets(e.response)}});
  }
  return json{{"id", record.id},
              {"created_at", record.created_at},
              {"kind", to_string(record.kind)},
              {"status", to_string(record.status)},
              {"request", redact_secrets(record.request)},
              {"result", record.result},
              {"llm_exchanges", std::move(exchanges)}};
}

JobRecord job_from_json(const json& j) {
  try {
    JobRecord r;
    r.id = j.at("id").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    const auto kind = parse_job_kind(j.at("kind").get<std::string>());
    const auto status = parse_job_status(j.at("status").get<std::string>());
    if (!kind || !status) throw FormatError("job record has an unknown kind or status");
    r.kind = *kind;
    r.status = *status;
    r.request = j.value("request", json());
    r.result = j.value("result", json());
    for (const auto& e : j.value("llm_exchanges", json::array())) {
      r.llm_exchanges.push_back({e.value("request", json()), e.value("response", json())});
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed job record: ") + e.what());
  }
}

std::string new_job_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char date[32];
  std::strftime(date, sizeof date, "%Y-%m-%dT%H:%M:%S", &tm);
  char millis[8];
  std::snprintf(millis, sizeof millis, ".%03dZ", static_cast<int>(ms.count()));
  return std::string(date) + millis;
}

JsonlJobStore::JsonlJobStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  const std::string content(std::istreambuf_iterator<char>(in), {});
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos < content.size();) {
    const std::size_t line_start = pos;
    const std::size_t nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : content.size();
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      // An unterminated last line is a write cut short; drop it from the file.
      if (!terminated) {
        in.close();
        std::filesystem::resize_file(path_, line_start);
        return;
      }
      throw FormatError(path_.string() + ":" + std::to_string(line_no) + ": not valid JSON");
    }
    JobRecord r = job_from_json(j);
    index_[r.id] = records_.size();
    records_.push_back(std::move(r));
  }
  if (!content.empty() && content.back() != '\n') {
    // A complete record missing only its newline.
    std::ofstream(path_, std::ios::app | std::ios::binary) << '\n';
  }
}

void JsonlJobStore::append(JobRecord record) {
  std::lock_guard lock(mutex_);
  if (index_.count(record.id)) throw std::invalid_argument("duplicate job id " + record.id);
  const json j = to_json(record);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open job log " + path_.string());
  out << dump_json(j) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot write job log " + path_.string());
  // Keep exactly what was written, so reads agree before and after a reload.
  index_[record.id] = records_.size();
  records_.push_back(job_from_json(j));
}

std::optional<JobRecord> JsonlJobStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

std::vector<JobRecord> JsonlJobStore::list(std::optional<JobKind> kind, std::size_t offset,
                                           std::size_t limit) const {
  std::lock_guard lock(mutex_);
  std::vector<JobRecord> out;
  std::size_t skipped = 0;
  for (auto it = records_.rbegin(); it != records_.rend() && out.size() < limit; ++it) {
    if (kind && it->kind != *kind) continue;
    if (skipped++ < offset) continue;
    out.push_back(*it);
  }
  return out;
}

std::size_t JsonlJobStore::count(std::optional<JobKind> kind) const {
  std::lock_guard lock(mutex_);
  if (!kind) return records_.size();
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                [&](const JobRecord& r) { return r.kind == *kind; }));
}

}  // namespace larf
