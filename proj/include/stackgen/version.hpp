#pragma once

namespace stackgen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stackgen
