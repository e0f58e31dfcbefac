#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crdrl/staircase.hpp"

namespace crdrl {

/// Malformed input file. what() carries "<source>:<line>: <reason>".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& reason);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Shortest text that round-trips (17 significant digits, %.17g).
std::string format_double(double v);

/// Comma-separated decimals; blank lines and lines starting with '#' are skipped.
std::vector<std::vector<double>> parse_csv_rows(std::istream& in, const std::string& source);

/// Exactly one data row of N values.
QuantileVector read_quantile_vector(const std::filesystem::path& path);
/// One QuantileVector per data row; every row must have the same length.
std::vector<QuantileVector> read_quantile_rows(const std::filesystem::path& path);
/// Rows of "location,weight".
DiracMixture read_mixture(const std::filesystem::path& path);

void write_row(std::ostream& out, std::span<const double> values);

}  // namespace crdrl
