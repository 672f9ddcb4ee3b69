#pragma once

#include <string>

namespace ampse {

/// 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

}  // namespace ampse
