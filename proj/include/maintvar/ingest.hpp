#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maintvar/csv.hpp"
#include "maintvar/date.hpp"
#include "maintvar/errors.hpp"

namespace maintvar {

// The thirteen logical columns of a daily plant log, in canonical order.
inline constexpr std::size_t kColumnCount = 13;
inline constexpr std::array<std::string_view, kColumnCount> kLogicalColumns = {
    "date",           "array_poly_1",        "array_poly_2",   "array_poly_3",
    "array_thin_film", "array_cpv",          "total_kwh",      "aggregate_meter_kwh",
    "difference_kwh", "seeds_kwh",           "insolation",     "pr_pct",
    "issues_text",
};

inline constexpr std::size_t kNumericFieldCount = 11;  // everything but date and issues_text

/// One row of the plant log. Numeric cells are optional so that missing
/// or unparseable entries survive until imputation decides their fate.
struct DailyRecord {
    Date date;
    std::array<std::optional<double>, 5> array_kwh;  // poly x3, thin-film, CPV
    std::optional<double> total_kwh;
    std::optional<double> aggregate_meter_kwh;
    std::optional<double> difference_kwh;
    std::optional<double> seeds_kwh;  // opaque passthrough
    std::optional<double> insolation;
    std::optional<double> pr_pct;
    std::string issues_text;

    bool operator==(const DailyRecord&) const = default;

    /// Numeric fields indexed 0..10 in kLogicalColumns order (date and
    /// issues_text excluded).
    std::optional<double>& numeric(std::size_t idx) {
        switch (idx) {
            case 0:
            case 1:
            case 2:
            case 3:
            case 4: return array_kwh[idx];
            case 5: return total_kwh;
            case 6: return aggregate_meter_kwh;
            case 7: return difference_kwh;
            case 8: return seeds_kwh;
            case 9: return insolation;
            default: return pr_pct;
        }
    }
    const std::optional<double>& numeric(std::size_t idx) const {
        return const_cast<DailyRecord*>(this)->numeric(idx);
    }
};

inline std::string_view numeric_field_name(std::size_t idx) {
    return kLogicalColumns[idx + 1];  // shift past "date"
}

struct GapEntry {
    Date date;
    std::string field;   // logical column name, or "*" for whole-row events
    std::string reason;

    bool operator==(const GapEntry&) const = default;
};

struct Provenance {
    std::string source;
    std::size_t row_count = 0;

    bool operator==(const Provenance&) const = default;
};

struct PlantDataset {
    std::vector<DailyRecord> records;
    Provenance provenance;
    std::vector<GapEntry> gap_report;

    bool operator==(const PlantDataset&) const = default;
};

/// Maps the logical columns onto the header names of a concrete file.
struct Schema {
    std::array<std::string, kColumnCount> header_names;
    DateFormat date_format = DateFormat::Iso;

    /// Header names equal to the logical names.
    static Schema identity() {
        Schema s;
        for (std::size_t i = 0; i < kColumnCount; ++i)
            s.header_names[i] = std::string(kLogicalColumns[i]);
        return s;
    }

    /// Flat key-value text, one `logical_name = header name` per line.
    /// `date_format = iso|dmy` selects the date convention. '#' comments.
    static Schema load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open schema file: '" + path + "'");
        Schema s;
        std::array<bool, kColumnCount> seen{};
        std::string line;
        while (std::getline(in, line)) {
            std::string_view v = trim(line);
            if (v.empty() || v.front() == '#') continue;
            const auto eq = v.find('=');
            if (eq == std::string_view::npos)
                throw DataError("schema line without '=': \"" + std::string(v) + "\"");
            const std::string key{trim(v.substr(0, eq))};
            const std::string value{trim(v.substr(eq + 1))};
            if (key == "date_format") {
                if (value == "iso") s.date_format = DateFormat::Iso;
                else if (value == "dmy") s.date_format = DateFormat::DayMonthYear;
                else throw DataError("unknown date_format '" + value + "' (want iso or dmy)");
                continue;
            }
            const auto it = std::find(kLogicalColumns.begin(), kLogicalColumns.end(), key);
            if (it == kLogicalColumns.end())
                throw DataError("unknown schema key '" + key + "'");
            const auto idx = static_cast<std::size_t>(it - kLogicalColumns.begin());
            s.header_names[idx] = value;
            seen[idx] = true;
        }
        for (std::size_t i = 0; i < kColumnCount; ++i) {
            if (!seen[i])
                throw DataError("schema file missing logical column '" +
                                std::string(kLogicalColumns[i]) + "'");
        }
        return s;
    }
};

namespace detail {

inline bool is_missing_marker(std::string_view cell) {
    if (cell.empty() || cell == "-") return true;
    std::string lower;
    lower.reserve(cell.size());
    for (char c : cell) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower == "n/a" || lower == "na";
}

}  // namespace detail

/// Parses the 13-column daily log CSV into typed, date-sorted records.
/// Missing or unparseable numeric cells become empty optionals and are
/// listed in the gap report; a malformed date is a hard error because the
/// row cannot be placed on the calendar at all.
inline PlantDataset parse_dataset_csv(const std::string& path, const Schema& schema) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw EmptyFile(path);

    const auto& header = rows.front();
    std::array<std::size_t, kColumnCount> col_of{};
    for (std::size_t i = 0; i < kColumnCount; ++i) {
        const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
            return std::string_view(trim(h)) == schema.header_names[i];
        });
        if (it == header.end())
            throw MissingColumn(std::string(kLogicalColumns[i]), schema.header_names[i]);
        col_of[i] = static_cast<std::size_t>(it - header.begin());
    }

    PlantDataset ds;
    ds.provenance = {path, rows.size() - 1};

    auto cell_at = [](const std::vector<std::string>& row, std::size_t idx) -> std::string_view {
        return idx < row.size() ? std::string_view(row[idx]) : std::string_view{};
    };

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        DailyRecord rec;

        const std::string_view date_cell = trim(cell_at(row, col_of[0]));
        const auto date = parse_date(date_cell, schema.date_format);
        if (!date)
            throw DataError("row " + std::to_string(r + 1) + ": cannot parse date '" +
                            std::string(date_cell) + "'");
        rec.date = *date;

        for (std::size_t f = 0; f < kNumericFieldCount; ++f) {
            const std::string_view cell = trim(cell_at(row, col_of[f + 1]));
            if (detail::is_missing_marker(cell)) {
                ds.gap_report.push_back({rec.date, std::string(numeric_field_name(f)),
                                         cell.empty() ? "missing value (empty cell)"
                                                      : "missing value ('" + std::string(cell) + "')"});
                continue;
            }
            const auto value = parse_double(cell);
            if (!value || !std::isfinite(*value)) {
                ds.gap_report.push_back({rec.date, std::string(numeric_field_name(f)),
                                         "unparseable value ('" + std::string(cell) + "')"});
                continue;
            }
            rec.numeric(f) = *value;
        }

        std::string_view issues = trim(cell_at(row, col_of[12]));
        rec.issues_text.assign(issues.begin(), issues.end());
        ds.records.push_back(std::move(rec));
    }

    std::stable_sort(ds.records.begin(), ds.records.end(),
                     [](const DailyRecord& a, const DailyRecord& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < ds.records.size(); ++i) {
        if (ds.records[i].date == ds.records[i - 1].date)
            throw DuplicateDate(ds.records[i].date.to_string());
    }
    std::stable_sort(ds.gap_report.begin(), ds.gap_report.end(),
                     [](const GapEntry& a, const GapEntry& b) { return a.date < b.date; });
    return ds;
}

struct Violation {
    Date date;
    std::string field;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

/// Reports every invariant violation; parsing keeps offending values so
/// the caller can see them here rather than losing rows silently.
inline std::vector<Violation> validate_dataset(const PlantDataset& ds) {
    std::vector<Violation> out;
    auto check_nonneg = [&](const DailyRecord& rec, std::size_t field_idx) {
        const auto& v = rec.numeric(field_idx);
        if (v && *v < 0.0)
            out.push_back({rec.date, std::string(numeric_field_name(field_idx)), "non-negative"});
    };
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const DailyRecord& rec = ds.records[i];
        if (i > 0 && !(ds.records[i - 1].date < rec.date))
            out.push_back({rec.date, "date", "strictly-increasing"});
        for (std::size_t f : {0u, 1u, 2u, 3u, 4u, 5u, 6u, 8u, 9u}) check_nonneg(rec, f);
        if (rec.pr_pct && (*rec.pr_pct < 0.0 || *rec.pr_pct > 200.0))
            out.push_back({rec.date, "pr_pct", "within [0, 200]"});
    }
    return out;
}

enum class ImputePolicy { ForwardFill, Linear, Drop };

inline std::optional<ImputePolicy> parse_impute_policy(std::string_view name) {
    if (name == "forward_fill") return ImputePolicy::ForwardFill;
    if (name == "linear") return ImputePolicy::Linear;
    if (name == "drop") return ImputePolicy::Drop;
    return std::nullopt;
}

/// Fills numeric gaps. Absent calendar dates are first materialized as
/// missing rows so the result is an evenly spaced daily series; `drop`
/// instead removes any row with a missing numeric cell. issues_text is
/// never imputed. Linear interpolation fills boundary runs with the
/// nearest present value; forward fill refuses a missing first value.
inline PlantDataset impute_missing(const PlantDataset& input, ImputePolicy policy) {
    PlantDataset ds = input;
    if (ds.records.empty()) return ds;

    if (policy == ImputePolicy::Drop) {
        std::vector<DailyRecord> kept;
        kept.reserve(ds.records.size());
        for (const DailyRecord& rec : ds.records) {
            bool missing = false;
            for (std::size_t f = 0; f < kNumericFieldCount; ++f)
                if (!rec.numeric(f)) missing = true;
            if (missing)
                ds.gap_report.push_back({rec.date, "*", "row dropped (missing values)"});
            else
                kept.push_back(rec);
        }
        ds.records = std::move(kept);
        return ds;
    }

    // Materialize absent dates as all-missing rows.
    std::vector<DailyRecord> filled;
    filled.reserve(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (i > 0) {
            for (Date d = ds.records[i - 1].date.next_day(); d < ds.records[i].date;
                 d = d.next_day()) {
                DailyRecord blank;
                blank.date = d;
                filled.push_back(blank);
                ds.gap_report.push_back({d, "*", "absent date materialized"});
            }
        }
        filled.push_back(ds.records[i]);
    }
    ds.records = std::move(filled);

    const std::size_t n = ds.records.size();
    for (std::size_t f = 0; f < kNumericFieldCount; ++f) {
        const std::string field{numeric_field_name(f)};
        std::size_t present = 0;
        for (const DailyRecord& rec : ds.records) present += rec.numeric(f).has_value();
        if (present == 0) throw AllMissingColumn(field);
        if (present == n) continue;

        if (policy == ImputePolicy::ForwardFill) {
            if (!ds.records.front().numeric(f)) throw LeadingGap(field);
            for (std::size_t i = 1; i < n; ++i) {
                if (!ds.records[i].numeric(f)) {
                    ds.records[i].numeric(f) = ds.records[i - 1].numeric(f);
                    ds.gap_report.push_back({ds.records[i].date, field, "forward filled"});
                }
            }
            continue;
        }

        // Linear interpolation on the date axis.
        std::size_t i = 0;
        while (i < n) {
            if (ds.records[i].numeric(f)) {
                ++i;
                continue;
            }
            std::size_t run_end = i;
            while (run_end < n && !ds.records[run_end].numeric(f)) ++run_end;
            const bool has_left = i > 0;
            const bool has_right = run_end < n;
            for (std::size_t j = i; j < run_end; ++j) {
                double value = 0.0;
                std::string reason;
                if (has_left && has_right) {
                    const DailyRecord& a = ds.records[i - 1];
                    const DailyRecord& b = ds.records[run_end];
                    const double va = *a.numeric(f);
                    const double vb = *b.numeric(f);
                    const double t = static_cast<double>(ds.records[j].date.serial - a.date.serial) /
                                     static_cast<double>(b.date.serial - a.date.serial);
                    value = va + (vb - va) * t;
                    reason = "linear interpolated";
                } else if (has_left) {
                    value = *ds.records[i - 1].numeric(f);
                    reason = "filled with nearest value (trailing gap)";
                } else {
                    value = *ds.records[run_end].numeric(f);
                    reason = "filled with nearest value (leading gap)";
                }
                ds.records[j].numeric(f) = value;
                ds.gap_report.push_back({ds.records[j].date, field, reason});
            }
            i = run_end;
        }
    }
    return ds;
}

/// Inverse of parse_dataset_csv for valid datasets: writes the canonical
/// column order with the schema's header names and date convention.
inline std::string serialize_dataset(const PlantDataset& ds, const Schema& schema) {
    std::string out;
    std::vector<std::string> fields(kColumnCount);
    for (std::size_t i = 0; i < kColumnCount; ++i) fields[i] = schema.header_names[i];
    out += csv::join_row(fields);
    out += '\n';
    for (const DailyRecord& rec : ds.records) {
        fields[0] = format_date(rec.date, schema.date_format);
        for (std::size_t f = 0; f < kNumericFieldCount; ++f) {
            const auto& v = rec.numeric(f);
            fields[f + 1] = v ? format_double(*v) : std::string{};
        }
        fields[12] = rec.issues_text;
        out += csv::join_row(fields);
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace maintvar
