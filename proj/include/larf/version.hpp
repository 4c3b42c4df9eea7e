#pragma once

namespace larf {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace larf
