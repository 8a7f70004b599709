#pragma once

namespace rotconv {

inline constexpr const char* kVersion = "0.1.0";

} // namespace rotconv
