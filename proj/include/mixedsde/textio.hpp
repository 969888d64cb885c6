#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace mixedsde {

/// Locale-independent decimal rendering with 17 significant digits; the
/// format used by every CSV and report this library writes.
std::string format_float(double value);

/// Locale-independent parse of format_float output (round-trips exactly).
double parse_float(const std::string& text);

}  // namespace mixedsde
