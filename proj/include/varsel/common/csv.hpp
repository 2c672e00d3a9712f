#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace varsel::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Splits one CSV record on commas. Double-quoted fields may contain commas;
/// a doubled quote inside them is a literal quote.
std::vector<std::string> split_record(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape_field(std::string_view field);

std::string join_record(const std::vector<std::string>& fields);

}  // namespace varsel::csv
