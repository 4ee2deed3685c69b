#pragma once

#include <optional>
#include <string>

namespace lift::evalkit {

// Content of the last \boxed{...} marker, with thousands separators and
// surrounding whitespace stripped. Absent when there is no marker or the
// content is not numeric.
std::optional<std::string> extract_boxed_answer(const std::string& text);

// Numeric equality at relative tolerance 1e-6. Unparseable input compares
// false (callers may log the parse failure).
bool answers_equal(const std::string& a, const std::string& b);

// Parse a decimal, rational ("7/2") or integer string.
std::optional<double> parse_numeric(const std::string& s);

}  // namespace lift::evalkit
