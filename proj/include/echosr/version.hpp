#pragma once

namespace echosr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace echosr
