#pragma once

namespace tractequity {
inline constexpr const char* kVersion = "0.1.0";
}
