#ifndef CRSLAB_REPORT_HPP
#define CRSLAB_REPORT_HPP

#include <string>
#include <variant>
#include <vector>

namespace crslab {

using ReportValue = std::variant<std::string, double, long long>;

// Tabular result with a stable column order. Floats print with 6 significant
// digits in both formats, so reruns are byte-identical.
struct Report {
    std::vector<std::string> columns;
    std::vector<std::vector<ReportValue>> rows;

    void add_row(std::vector<ReportValue> row) { rows.push_back(std::move(row)); }
};

enum class ReportFormat { csv, json, table };

std::string format_value(const ReportValue& value);
std::string emit_csv(const Report& report);
std::string emit_json(const Report& report);
std::string emit_table(const Report& report);
std::string emit_report(const Report& report, ReportFormat format);

// Parses emit_json output back into a Report (columns inferred from the
// first object; used to assert the round-trip in tests).
Report parse_json_report(const std::string& text);

}  // namespace crslab

#endif
