#pragma once

namespace ovb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ovb
