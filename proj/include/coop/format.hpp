#pragma once

#include <cstdio>
#include <string>

namespace coop {

/// Fixed 12-significant-digit rendering used by every CSV export.
inline std::string format_g12(double x) {
    if (x == 0.0) x = 0.0;  // fold -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

}  // namespace coop
