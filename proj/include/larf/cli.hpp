#pragma once

#include <iosfwd>
#include <memory>

#include "larf/llm.hpp"

namespace larf {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitFallback = 3,  // output written, but the model's annotations were discarded
  kExitUpstream = 4,  // transport or auth failure talking to the model endpoint
  kExitFailure = 5,
};

// Entry point behind the `larf` binary. Output is buffered and only written
// to `out` when the command succeeds (or falls back). A non-null backend
// replaces the HTTP client, for tests.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err, std::shared_ptr<ChatBackend> backend = nullptr);

}  // namespace larf
