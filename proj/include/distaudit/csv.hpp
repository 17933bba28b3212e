#pragma once

#include <string>
#include <vector>

namespace distaudit::csv {

// Minimal RFC-4180-style CSV: fields containing comma, quote or newline are
// quoted on write; quoted fields and doubled quotes are handled on read.
// Intersection subgroup labels like {G1,R2} rely on this.
std::string escape(const std::string& field);
std::string join_row(const std::vector<std::string>& fields);
std::vector<std::string> split_row(const std::string& line);

// Reads all rows; skips blank lines; throws on unterminated quotes.
std::vector<std::vector<std::string>> read_file(const std::string& path);

}  // namespace distaudit::csv
