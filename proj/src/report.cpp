#include "crslab/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace crslab {

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string format_value(const ReportValue& value) {
    if (std::holds_alternative<std::string>(value)) return std::get<std::string>(value);
    if (std::holds_alternative<double>(value)) return format_double(std::get<double>(value));
    return std::to_string(std::get<long long>(value));
}

std::string emit_csv(const Report& report) {
    std::ostringstream out;
    for (size_t c = 0; c < report.columns.size(); ++c)
        out << (c ? "," : "") << csv_escape(report.columns[c]);
    out << "\n";
    for (const auto& row : report.rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(format_value(row[c]));
        out << "\n";
    }
    return out.str();
}

std::string emit_json(const Report& report) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json obj;
        for (size_t c = 0; c < row.size() && c < report.columns.size(); ++c) {
            const ReportValue& value = row[c];
            if (std::holds_alternative<std::string>(value))
                obj[report.columns[c]] = std::get<std::string>(value);
            else if (std::holds_alternative<double>(value)) {
                const double v = std::get<double>(value);
                // fixed textual precision so JSON and CSV agree byte for byte
                if (std::isnan(v))
                    obj[report.columns[c]] = nullptr;
                else
                    obj[report.columns[c]] = nlohmann::ordered_json::parse(format_double(v));
            } else {
                obj[report.columns[c]] = std::get<long long>(value);
            }
        }
        rows.push_back(std::move(obj));
    }
    return rows.dump(2) + "\n";
}

std::string emit_table(const Report& report) {
    std::vector<size_t> width(report.columns.size(), 0);
    std::vector<std::vector<std::string>> cells;
    for (size_t c = 0; c < report.columns.size(); ++c) width[c] = report.columns[c].size();
    for (const auto& row : report.rows) {
        std::vector<std::string> line;
        for (size_t c = 0; c < row.size(); ++c) {
            line.push_back(format_value(row[c]));
            if (c < width.size()) width[c] = std::max(width[c], line.back().size());
        }
        cells.push_back(std::move(line));
    }
    std::ostringstream out;
    for (size_t c = 0; c < report.columns.size(); ++c) {
        out << report.columns[c] << std::string(width[c] - report.columns[c].size(), ' ');
        out << (c + 1 < report.columns.size() ? "  " : "");
    }
    out << "\n";
    for (const auto& line : cells) {
        for (size_t c = 0; c < line.size(); ++c) {
            out << line[c];
            if (c + 1 < line.size()) out << std::string(width[c] - line[c].size() + 2, ' ');
        }
        out << "\n";
    }
    return out.str();
}

std::string emit_report(const Report& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::csv: return emit_csv(report);
        case ReportFormat::json: return emit_json(report);
        case ReportFormat::table: return emit_table(report);
    }
    throw std::invalid_argument("emit_report: unknown format");
}

Report parse_json_report(const std::string& text) {
    const auto doc = nlohmann::ordered_json::parse(text);
    Report report;
    for (const auto& row : doc) {
        if (report.columns.empty())
            for (const auto& [key, _] : row.items()) report.columns.push_back(key);
        std::vector<ReportValue> values;
        for (const auto& column : report.columns) {
            const auto& v = row.at(column);
            if (v.is_string())
                values.emplace_back(v.get<std::string>());
            else if (v.is_number_integer())
                values.emplace_back(v.get<long long>());
            else if (v.is_null())
                values.emplace_back(std::nan(""));
            else
                values.emplace_back(v.get<double>());
        }
        report.add_row(std::move(values));
    }
    return report;
}

}  // namespace crslab
