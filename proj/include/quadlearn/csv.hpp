#pragma once

// Small helpers for the delimited-text formats. Doubles use the shortest
// representation that parses back to the same value.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace quadlearn::csv {

std::string format(double v);
void append(std::string& out, double v);
double parse_double(std::string_view s);
std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::vector<std::string_view> lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace quadlearn::csv
