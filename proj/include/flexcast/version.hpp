#pragma once

namespace flexcast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace flexcast
