#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ptdr {

// Raised for malformed or inconsistent input data (files, schemas, cross
// references). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

// Strict parsers; `where` is prepended to error messages ("file:line: ...").
double parse_double(std::string_view token, const std::string& where);
long parse_long(std::string_view token, const std::string& where);

std::vector<std::string> split_csv_line(std::string_view line);

std::uint64_t fnv1a64(std::string_view bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace ptdr
