#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "rotconv/diagnostics/row.hpp"

namespace rotconv {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_header(std::ostream& out, bool with_level = false) {
    if (with_level) out << "level,";
    const auto& cols = diagnostics_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

inline void write_csv_row(std::ostream& out, const DiagnosticsRow& r, std::optional<int> level = std::nullopt) {
    if (level) out << *level << ',';
    const auto vals = row_values(r);
    for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << format_double(vals[i]);
    out << '\n';
}

inline void write_csv(std::ostream& out, const DiagnosticsSeries& rows) {
    write_csv_header(out);
    for (const auto& r : rows) write_csv_row(out, r);
}

} // namespace rotconv
