#pragma once

namespace hypso {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hypso
