#pragma once

#include <cstdio>
#include <string>

namespace ruelle {

/// 12 significant digits, '.' separator regardless of the global locale
/// (the C locale is never switched by this library). Negative zero prints as 0.
inline std::string format_number(double x) {
    if (x == 0.0) x = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

}  // namespace ruelle
