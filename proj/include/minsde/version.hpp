#pragma once

namespace minsde {

inline constexpr const char* kVersion = "0.1.0";

}
