#ifndef RSODC_CLI_IO_HPP
#define RSODC_CLI_IO_HPP

#include "rsodc/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsodc::cli {

using Json = nlohmann::ordered_json;

/// Bad user input (unreadable file, malformed CSV, inconsistent sizes). Maps to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;  // empty when the file had none
    Matrix values;
};

/// Comma-separated numeric table; every row must have the same number of fields.
CsvTable read_csv(const std::filesystem::path& path, bool has_header);

/// 17 significant digits, enough to round-trip a double.
std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Row-major nested arrays.
Json matrix_to_json(const Matrix& m);
Matrix json_to_matrix(const Json& j);

/// JSON numbers cannot hold inf or NaN: those become the strings "inf", "-inf", "nan".
Json number_to_json(double value);

void write_json(const std::filesystem::path& path, const Json& payload);
Json read_json(const std::filesystem::path& path);

/// 2-d scatter of the first two columns (or column 1 against subject index when
/// there is only one), colored by label.
std::string svg_scatter(const Matrix& points, const std::vector<int>& labels, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rsodc::cli

#endif
