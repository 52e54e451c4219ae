#pragma once

namespace mismatchlab {

inline constexpr const char* kVersion = "0.1.0";

}
