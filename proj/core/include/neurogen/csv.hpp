#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace neurogen {

/// Shortest text that reads back to the same double; NaN prints as "nan".
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

std::string csv_row(const std::vector<std::string>& fields);

/// Splits one CSV line, honouring quoted fields.
std::vector<std::string> csv_split(std::string_view line);

}  // namespace neurogen
