#include "campro/table.hpp"

#include <fmt/format.h>

#include "campro/error.hpp"

namespace campro {

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c, TableFormat format) {
    if (std::holds_alternative<std::monostate>(c)) return format == TableFormat::Csv ? "" : "-";
    if (const auto* s = std::get_if<std::string>(&c)) {
        return format == TableFormat::Csv ? csv_escape(*s) : *s;
    }
    const double v = std::get<double>(c);
    return format == TableFormat::Csv ? fmt::format("{:.17g}", v) : fmt::format("{:.3f}", v);
}

}  // namespace

TableFormat parse_table_format(const std::string& text) {
    if (text == "csv") return TableFormat::Csv;
    if (text == "md" || text == "markdown") return TableFormat::Markdown;
    throw InvalidRangeError("unknown table format '" + text + "'");
}

std::string Table::render(TableFormat format) const {
    std::string out;
    if (format == TableFormat::Csv) {
        for (const auto& m : metadata) out += "# " + m + "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out += (i ? "," : "") + csv_escape(columns[i]);
        }
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i], format);
            out += "\n";
        }
        return out;
    }
    for (const auto& m : metadata) out += "<!-- " + m + " -->\n";
    out += "|";
    for (const auto& c : columns) out += " " + c + " |";
    out += "\n|";
    for (std::size_t i = 0; i < columns.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& row : rows) {
        out += "|";
        for (const auto& c : row) out += " " + cell_text(c, format) + " |";
        out += "\n";
    }
    return out;
}

Cell optional_cell(const std::optional<double>& v) {
    if (v) return *v;
    return std::monostate{};
}

}  // namespace campro
