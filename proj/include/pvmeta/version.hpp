#pragma once

namespace pvmeta {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pvmeta
