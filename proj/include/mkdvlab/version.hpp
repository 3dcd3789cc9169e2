#pragma once

namespace mkdv {

inline constexpr const char* version = "0.1.0";

}
