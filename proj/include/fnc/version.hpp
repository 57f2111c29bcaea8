#pragma once

namespace fnc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fnc
