#pragma once

namespace crlr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace crlr
