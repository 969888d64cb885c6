#include "mixedsde/textio.hpp"

#include <charconv>
#include <system_error>

#include "mixedsde/errors.hpp"

namespace mixedsde {

std::string format_float(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::general, 17);
  if (result.ec != std::errc{}) throw NumericalError("float formatting failed");
  return std::string(buffer, result.ptr);
}

double parse_float(const std::string& text) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    throw DomainError("not a floating-point literal: '" + text + "'");
  }
  return value;
}

}  // namespace mixedsde
