#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace campro {

enum class TableFormat { Csv, Markdown };

TableFormat parse_table_format(const std::string& text);

/// Text, a number, or a missing value.
using Cell = std::variant<std::monostate, std::string, double>;

struct Table {
    std::vector<std::string> metadata;  ///< "key: value" lines rendered above the table
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    /// Markdown numbers use 3 decimals, CSV keeps full precision (%.17g).
    [[nodiscard]] std::string render(TableFormat format) const;
};

Cell optional_cell(const std::optional<double>& v);

}  // namespace campro
