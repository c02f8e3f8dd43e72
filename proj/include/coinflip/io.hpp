#pragma once

// Text formatting and CSV helpers shared by the harness and the CLI.
// All number formatting is locale-independent.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coinflip {

/// Malformed or missing data files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips to the same double.
std::string format_full(double x);

/// Six significant digits.
std::string format_sig6(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws DataError if absent.
    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
    const std::string& cell(std::size_t row, std::string_view name) const;
};

/// Renders header + rows with '\n' line endings. Fields must not contain
/// commas or newlines.
std::string to_csv(const CsvTable& table);

/// Parses comma-separated text with a header row. Throws DataError on an
/// empty document, a missing header, or ragged rows.
CsvTable parse_csv(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so a failed write never
/// leaves a partial file at path.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Parses "a,b,c" into doubles. Throws std::invalid_argument on junk.
std::vector<double> parse_number_list(std::string_view text);

}  // namespace coinflip
