#pragma once

#include <string>
#include <vector>

namespace hitforge::csvio {

// RFC-4180 style quoting: fields containing comma, quote or newline are
// wrapped in double quotes with embedded quotes doubled.
std::string escape(const std::string& field);

// Splits one CSV record. Handles quoted fields; does not handle embedded
// newlines (the corpus writers never emit them).
std::vector<std::string> split_record(const std::string& line);

// Fixed-decimal formatting, used for the 6-decimal corpus columns and the
// 4-decimal report cells. printf rounds the binary value to nearest with
// ties to even.
std::string format_fixed(double v, int decimals);

// Shortest representation that parses back to the identical double.
std::string format_exact(double v);

}  // namespace hitforge::csvio
