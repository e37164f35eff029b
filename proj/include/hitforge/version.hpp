#pragma once

namespace hitforge {
inline constexpr const char* kVersion = "0.1.0";
}
