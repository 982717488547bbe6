#pragma once

namespace gmc {

inline constexpr const char* kVersion = "0.1.0";

} // namespace gmc
