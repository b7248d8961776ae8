#pragma once

namespace nlcp {

inline constexpr const char* version = "0.1.0";

}  // namespace nlcp
