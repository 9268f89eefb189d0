#pragma once

namespace foldcert {

inline constexpr const char* kToolName = "foldcert";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace foldcert
