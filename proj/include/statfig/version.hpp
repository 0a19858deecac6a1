#pragma once

namespace statfig {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kProgramName = "statfig";

}  // namespace statfig
