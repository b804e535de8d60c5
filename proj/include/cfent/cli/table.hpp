#ifndef CFENT_CLI_TABLE_HPP
#define CFENT_CLI_TABLE_HPP

// Plot-ready tables and their CSV / JSON encodings. Numbers are written with
// 12 significant digits in both encodings; missing or non-finite values are
// an empty CSV field and JSON null.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cfent::cli {

using json = nlohmann::json;

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

inline Cell number(std::optional<double> v)
{
    if (!v || !std::isfinite(*v)) {
        return std::monostate{};
    }
    return *v;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    json meta = json::object();
};

inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// The double that the 12-significant-digit decimal text denotes.
inline double rounded(double v)
{
    return std::strtod(format_number(v).c_str(), nullptr);
}

inline std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

inline std::string cell_text(const Cell& cell)
{
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(double v) const
        {
            return std::isfinite(v) ? format_number(v) : std::string{};
        }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const { return csv_escape(v); }
    };
    return std::visit(Visitor{}, cell);
}

inline json cell_json(const Cell& cell)
{
    struct Visitor {
        json operator()(std::monostate) const { return nullptr; }
        json operator()(double v) const
        {
            return std::isfinite(v) ? json(rounded(v)) : json(nullptr);
        }
        json operator()(long long v) const { return v; }
        json operator()(bool v) const { return v; }
        json operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

/// Header row plus one line per row, CRLF-free.
inline std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) out += ',';
        out += csv_escape(table.columns[c]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            out += cell_text(row[c]);
        }
        out += '\n';
    }
    return out;
}

/// {"meta": {...}, "rows": [{column: value, ...}, ...]}
inline std::string to_json_text(const Table& table)
{
    json doc;
    doc["meta"] = table.meta;
    doc["meta"]["columns"] = table.columns;
    doc["rows"] = json::array();
    for (const auto& row : table.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c) {
            obj[table.columns[c]] = cell_json(row[c]);
        }
        doc["rows"].push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

enum class Format { csv, json };

inline std::string serialize(const Table& table, Format format)
{
    return format == Format::csv ? to_csv(table) : to_json_text(table);
}

}  // namespace cfent::cli

#endif
