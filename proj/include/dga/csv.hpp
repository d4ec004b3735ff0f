/*
 * Minimal comma-separated reader for the numeric tables the solver consumes
 * (materials, admittances, feed data, uncertainty budgets). A header row is
 * mandatory and its column names are checked.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "dga/errors.hpp"

namespace dga {

struct csv_row
{
    std::size_t line;
    std::vector<std::string> cells;
};

struct csv_table
{
    std::vector<std::string> header;
    std::vector<csv_row> rows;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/* Cells may be wrapped in double quotes to carry commas; "" escapes a quote. */
inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); i++)
    {
        const char ch = line[i];
        if (quoted)
        {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"')
            {
                cell += '"';
                i++;
            }
            else if (ch == '"')
                quoted = false;
            else
                cell += ch;
        }
        else if (ch == '"' && trim(cell).empty())
        {
            cell.clear();
            quoted = was_quoted = true;
        }
        else if (ch == ',')
        {
            out.push_back(was_quoted ? cell : trim(cell));
            cell.clear();
            was_quoted = false;
        }
        else if (!(was_quoted && std::isspace(static_cast<unsigned char>(ch))))
            cell += ch;
    }
    out.push_back(was_quoted ? cell : trim(cell));
    return out;
}

} // namespace detail

/* The header must equal `expected_header`, optionally followed by a prefix
 * of `optional_trailing`; every row has as many cells as the header. */
inline csv_table read_csv(std::istream& is, const std::vector<std::string>& expected_header,
                          const std::vector<std::string>& optional_trailing = {})
{
    csv_table tbl;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(is, line))
    {
        lineno++;
        auto t = detail::trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        auto cells = detail::split_csv_line(t);
        if (!have_header)
        {
            bool ok = cells.size() >= expected_header.size() &&
                      cells.size() <= expected_header.size() + optional_trailing.size() &&
                      std::equal(expected_header.begin(), expected_header.end(), cells.begin());
            for (std::size_t k = expected_header.size(); ok && k < cells.size(); k++)
                ok = cells[k] == optional_trailing[k - expected_header.size()];
            if (!ok)
            {
                std::string want;
                for (const auto& h : expected_header)
                    want += (want.empty() ? "" : ", ") + h;
                for (const auto& h : optional_trailing)
                    want += " [, " + h + "]";
                throw parse_error("bad CSV header, expected '" + want + "'", lineno);
            }
            tbl.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != tbl.header.size())
            throw parse_error("expected " + std::to_string(tbl.header.size()) + " columns", lineno);
        tbl.rows.push_back({lineno, std::move(cells)});
    }
    if (!have_header)
        throw parse_error("missing CSV header row", lineno + 1);
    return tbl;
}

inline csv_table read_csv(const std::string& path, const std::vector<std::string>& expected_header)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw config_error("cannot open '" + path + "'");
    return read_csv(ifs, expected_header);
}

inline double csv_number(const csv_row& row, std::size_t col)
{
    const auto& s = row.cells.at(col);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw parse_error("'" + s + "' is not a number", row.line);
    return v;
}

} // namespace dga
