// SPDX-License-Identifier: Apache-2.0
//
// eit-mimo: electromagnetic channel modelling and capacity analysis toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#ifndef EIT_IO_RESULTS_HPP
#define EIT_IO_RESULTS_HPP

#include "eit/core/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace eit::io
{
    inline constexpr int result_schema_version = 1;

    using Cell = std::variant<double, std::int64_t, std::string>;

    struct Column
    {
        std::string name;
        std::string unit = "1"; // "1" for dimensionless

        bool operator==(const Column &) const = default;
    };

    struct ResultTable
    {
        std::string name;
        std::vector<Column> columns;
        std::vector<std::vector<Cell>> rows;
        std::vector<std::pair<std::string, std::string>> metadata; // kept in insertion order

        void add_row(std::vector<Cell> row)
        {
            if (row.size() != columns.size())
                throw shape_error("table '" + name + "': row has " + std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(columns.size()));
            rows.push_back(std::move(row));
        }

        void validate() const
        {
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (rows[i].size() != columns.size())
                    throw shape_error("table '" + name + "': row " + std::to_string(i) + " is not rectangular");
            for (const auto &c : columns)
                if (c.name.empty() || c.unit.empty())
                    throw shape_error("table '" + name + "': every column needs a name and a unit");
        }

        std::size_t column_index(const std::string &col) const
        {
            for (std::size_t i = 0; i < columns.size(); ++i)
                if (columns[i].name == col)
                    return i;
            throw shape_error("table '" + name + "' has no column '" + col + "'");
        }

        double number(std::size_t row, const std::string &col) const
        {
            const Cell &c = rows.at(row).at(column_index(col));
            if (const auto *d = std::get_if<double>(&c))
                return *d;
            if (const auto *i = std::get_if<std::int64_t>(&c))
                return static_cast<double>(*i);
            throw shape_error("table '" + name + "': column '" + col + "' is not numeric");
        }
    };

    enum class Format
    {
        csv,
        json
    };

    inline const char *extension(Format f) { return f == Format::csv ? ".csv" : ".json"; }

    // Shortest text that reads back to the same double
    inline std::string format_number(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        if (v == 0.0)
            v = 0.0; // no "-0"
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }

    namespace detail_results
    {
        inline Cell parse_cell(const std::string &s, bool quoted)
        {
            if (quoted || s.empty())
                return s;
            std::int64_t i = 0;
            auto ri = std::from_chars(s.data(), s.data() + s.size(), i);
            if (ri.ec == std::errc() && ri.ptr == s.data() + s.size())
                return i;
            if (s == "nan")
                return std::nan("");
            if (s == "inf" || s == "-inf")
                return s[0] == '-' ? -HUGE_VAL : HUGE_VAL;
            double d = 0.0;
            auto rd = std::from_chars(s.data(), s.data() + s.size(), d);
            if (rd.ec == std::errc() && rd.ptr == s.data() + s.size())
                return d;
            return s;
        }

        inline std::string csv_field(const std::string &s, bool quote = false)
        {
            if (!quote && s.find_first_of(",\"\r\n") == std::string::npos)
                return s;
            std::string out = "\"";
            for (char c : s)
            {
                if (c == '"')
                    out += '"';
                out += c;
            }
            return out + "\"";
        }

        inline std::string cell_text(const Cell &c)
        {
            if (const auto *d = std::get_if<double>(&c))
                return format_number(*d);
            if (const auto *i = std::get_if<std::int64_t>(&c))
                return std::to_string(*i);
            return std::get<std::string>(c);
        }

        // Splits CSV text into records per RFC 4180; quoted fields may span lines
        inline std::vector<std::vector<std::pair<std::string, bool>>> parse_records(std::istream &in)
        {
            std::vector<std::vector<std::pair<std::string, bool>>> records;
            std::vector<std::pair<std::string, bool>> rec;
            std::string field;
            bool quoted = false, in_quotes = false, any = false;
            auto end_field = [&] {
                rec.emplace_back(std::move(field), quoted);
                field.clear();
                quoted = false;
            };
            auto end_record = [&] {
                end_field();
                records.push_back(std::move(rec));
                rec.clear();
                any = false;
            };
            char c;
            while (in.get(c))
            {
                if (in_quotes)
                {
                    if (c == '"')
                    {
                        if (in.peek() == '"')
                        {
                            in.get(c);
                            field += '"';
                        }
                        else
                            in_quotes = false;
                    }
                    else
                        field += c;
                    continue;
                }
                if (c == '"' && field.empty())
                    in_quotes = quoted = any = true;
                else if (c == ',')
                    end_field(), any = true;
                else if (c == '\r' && in.peek() == '\n')
                    continue;
                else if (c == '\n')
                    end_record();
                else
                    field += c, any = true;
            }
            if (in_quotes)
                throw io_error("unterminated quoted CSV field");
            if (any || !field.empty() || !rec.empty())
                end_record();
            return records;
        }
    }

    // Header row of name(unit) fields, then one record per row, CRLF-free
    inline void write_csv(const ResultTable &t, std::ostream &out)
    {
        t.validate();
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out << (i ? "," : "") << detail_results::csv_field(t.columns[i].name + "(" + t.columns[i].unit + ")");
        out << '\n';
        for (const auto &row : t.rows)
        {
            for (std::size_t i = 0; i < row.size(); ++i)
            {
                // text that would read back as a number stays quoted
                const auto *text = std::get_if<std::string>(&row[i]);
                const bool quote =
                    text && !std::holds_alternative<std::string>(detail_results::parse_cell(*text, false));
                out << (i ? "," : "") << detail_results::csv_field(detail_results::cell_text(row[i]), quote);
            }
            out << '\n';
        }
    }

    // Inverse of write_csv; metadata is not part of the CSV form
    inline ResultTable read_csv(std::istream &in, std::string name = {})
    {
        auto records = detail_results::parse_records(in);
        if (records.empty())
            throw io_error("CSV has no header row");
        ResultTable t;
        t.name = std::move(name);
        for (const auto &[h, q] : records.front())
        {
            const auto open = h.rfind('(');
            if (open == std::string::npos || h.empty() || h.back() != ')')
                throw io_error("CSV header field '" + h + "' is not of the form name(unit)");
            t.columns.push_back({h.substr(0, open), h.substr(open + 1, h.size() - open - 2)});
        }
        for (std::size_t r = 1; r < records.size(); ++r)
        {
            std::vector<Cell> row;
            for (const auto &[s, q] : records[r])
                row.push_back(detail_results::parse_cell(s, q));
            if (row.size() != t.columns.size())
                throw io_error("CSV record " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                               " fields, expected " + std::to_string(t.columns.size()));
            t.rows.push_back(std::move(row));
        }
        return t;
    }

    inline nlohmann::ordered_json to_json(const ResultTable &t)
    {
        t.validate();
        nlohmann::ordered_json j;
        j["schema_version"] = result_schema_version;
        j["table"] = t.name;
        j["metadata"] = nlohmann::ordered_json::object();
        for (const auto &[k, v] : t.metadata)
            j["metadata"][k] = v;
        j["columns"] = nlohmann::ordered_json::array();
        for (const auto &c : t.columns)
            j["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto &row : t.rows)
        {
            auto r = nlohmann::ordered_json::array();
            for (const auto &c : row)
                std::visit(
                    [&](const auto &v) {
                        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>)
                        {
                            if (std::isfinite(v))
                                r.push_back(v == 0.0 ? 0.0 : v);
                            else
                                r.push_back(nullptr); // JSON has no NaN/Inf
                        }
                        else
                            r.push_back(v);
                    },
                    c);
            j["rows"].push_back(std::move(r));
        }
        return j;
    }

    inline void write_json(const ResultTable &t, std::ostream &out) { out << to_json(t).dump(2) << '\n'; }

    inline void write_results(const ResultTable &t, Format format, const std::filesystem::path &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw io_error("cannot open '" + path.string() + "' for writing");
        if (format == Format::csv)
            write_csv(t, out);
        else
            write_json(t, out);
        out.flush();
        if (!out)
            throw io_error("write to '" + path.string() + "' failed");
    }
}

#endif
