#include "crdrl/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace crdrl {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& reason)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason), line_(line) {}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_field(std::string_view field, const std::string& source, std::size_t line) {
    field = trim(field);
    if (field.empty()) throw ParseError(source, line, "empty field");
    if (field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(source, line, "not a number: '" + std::string(field) + "'");
    }
    return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

}  // namespace

std::vector<std::vector<double>> parse_csv_rows(std::istream& in, const std::string& source) {
    std::vector<std::vector<double>> rows;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = trim(raw);
        if (text.empty() || text.front() == '#') continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            row.push_back(parse_field(text.substr(start, comma - start), source, line));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

QuantileVector read_quantile_vector(const std::filesystem::path& path) {
    auto in = open_input(path);
    auto rows = parse_csv_rows(in, path.string());
    if (rows.size() != 1) {
        throw ParseError(path.string(), rows.size(),
                         "expected exactly one row of quantile values, found " +
                             std::to_string(rows.size()));
    }
    try {
        return QuantileVector(std::move(rows.front()));
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string(), 1, e.what());
    }
}

std::vector<QuantileVector> read_quantile_rows(const std::filesystem::path& path) {
    auto in = open_input(path);
    auto rows = parse_csv_rows(in, path.string());
    if (rows.empty()) throw ParseError(path.string(), 0, "no data rows");
    std::vector<QuantileVector> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) {
            throw ParseError(path.string(), r + 1,
                             "row has " + std::to_string(rows[r].size()) + " values, expected " +
                                 std::to_string(rows.front().size()));
        }
        try {
            out.emplace_back(std::move(rows[r]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string(), r + 1, e.what());
        }
    }
    return out;
}

DiracMixture read_mixture(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<DiracAtom> atoms;
    std::string raw;
    std::size_t line = 0;
    // Re-scan line by line so errors point at the physical line.
    while (std::getline(in, raw)) {
        ++line;
        const auto text = trim(raw);
        if (text.empty() || text.front() == '#') continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(path.string(), line, "expected 'location,weight'");
        }
        atoms.push_back({parse_field(text.substr(0, comma), path.string(), line),
                         parse_field(text.substr(comma + 1), path.string(), line)});
    }
    try {
        return DiracMixture(std::move(atoms));
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string(), line, e.what());
    }
}

void write_row(std::ostream& out, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        out << format_double(values[i]);
    }
    out << '\n';
}

}  // namespace crdrl
