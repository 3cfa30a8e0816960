#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "maintvar/csv.hpp"
#include "maintvar/errors.hpp"
#include "maintvar/ingest.hpp"
#include "maintvar/matrix.hpp"

namespace maintvar {

/// Name of the forecast target column appended to every feature matrix.
inline constexpr std::string_view kTargetLabel = "Total generation (KWH)";

namespace text {

/// Lowercases, maps punctuation to spaces, and splits into word tokens.
/// Matching happens on this token stream, so "Grid-Failure!" and
/// "grid failure" are the same phrase.
inline std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : raw) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            current += static_cast<char>(std::tolower(u));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

/// Half-open token span [begin, end).
struct Span {
    std::size_t begin;
    std::size_t end;

    bool overlaps(const Span& other) const { return begin < other.end && other.begin < end; }
};

/// Every position where `phrase` occurs as a contiguous token run.
inline std::vector<Span> find_phrase(const std::vector<std::string>& tokens,
                                     const std::vector<std::string>& phrase) {
    std::vector<Span> spans;
    if (phrase.empty() || phrase.size() > tokens.size()) return spans;
    for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < phrase.size(); ++j) {
            if (tokens[i + j] != phrase[j]) {
                match = false;
                break;
            }
        }
        if (match) spans.push_back({i, i + phrase.size()});
    }
    return spans;
}

}  // namespace text

/// One lexicon entry: phrases that assert the feature and phrases that
/// veto an overlapping assertion ("no module cleaning" contains
/// "module cleaning" but must not count as cleaning).
struct LexiconEntry {
    std::string label;
    std::vector<std::vector<std::string>> flag_phrases;  // tokenized
    std::vector<std::vector<std::string>> stop_phrases;  // tokenized
};

class FeatureLexicon {
public:
    FeatureLexicon() = default;

    /// Adds an entry; phrases are normalized with the same tokenizer used
    /// for log text. Throws DataError on duplicate labels, empty flag
    /// lists, or a phrase appearing as both flag and stop.
    void add_entry(std::string label, const std::vector<std::string>& flags,
                   const std::vector<std::string>& stops) {
        for (const LexiconEntry& e : entries_)
            if (e.label == label) throw DataError("duplicate lexicon label '" + label + "'");
        LexiconEntry entry;
        entry.label = std::move(label);
        for (const std::string& f : flags) {
            auto toks = text::tokenize(f);
            if (!toks.empty()) entry.flag_phrases.push_back(std::move(toks));
        }
        for (const std::string& s : stops) {
            auto toks = text::tokenize(s);
            if (!toks.empty()) entry.stop_phrases.push_back(std::move(toks));
        }
        if (entry.flag_phrases.empty())
            throw DataError("lexicon label '" + entry.label + "' has no flag phrases");
        for (const auto& f : entry.flag_phrases)
            for (const auto& s : entry.stop_phrases)
                if (f == s)
                    throw DataError("lexicon label '" + entry.label +
                                    "' lists the same phrase as flag and stop");
        entries_.push_back(std::move(entry));
    }

    const std::vector<LexiconEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const LexiconEntry& e : entries_) out.push_back(e.label);
        return out;
    }

    /// Lexicon file grammar: `[Label]` opens a block, then
    /// `flags = phrase; phrase; ...` and optionally `stops = ...`.
    /// Blank lines and '#' comments are ignored.
    static FeatureLexicon load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open lexicon file: '" + path + "'");
        FeatureLexicon lex;
        std::string line;
        std::string label;
        std::vector<std::string> flags, stops;
        bool open = false;
        auto flush = [&] {
            if (!open) return;
            lex.add_entry(label, flags, stops);
            flags.clear();
            stops.clear();
            open = false;
        };
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string_view v = trim(line);
            if (v.empty() || v.front() == '#') continue;
            if (v.front() == '[') {
                if (v.back() != ']')
                    throw DataError("lexicon line " + std::to_string(line_no) +
                                    ": unterminated [label]");
                flush();
                label = std::string(trim(v.substr(1, v.size() - 2)));
                if (label.empty())
                    throw DataError("lexicon line " + std::to_string(line_no) + ": empty label");
                open = true;
                continue;
            }
            const auto eq = v.find('=');
            if (eq == std::string_view::npos || !open)
                throw DataError("lexicon line " + std::to_string(line_no) +
                                ": expected 'flags = ...' or 'stops = ...' inside a [label] block");
            const std::string_view key = trim(v.substr(0, eq));
            std::vector<std::string>* dest = nullptr;
            if (key == "flags") dest = &flags;
            else if (key == "stops") dest = &stops;
            else
                throw DataError("lexicon line " + std::to_string(line_no) + ": unknown key '" +
                                std::string(key) + "'");
            std::string_view rest = v.substr(eq + 1);
            while (!rest.empty()) {
                const auto semi = rest.find(';');
                const std::string_view phrase = trim(rest.substr(0, semi));
                if (!phrase.empty()) dest->emplace_back(phrase);
                if (semi == std::string_view::npos) break;
                rest = rest.substr(semi + 1);
            }
        }
        flush();
        return lex;
    }

private:
    std::vector<LexiconEntry> entries_;
};

/// Labels asserted by a log entry. A label fires when at least one of its
/// flag phrases matches and that particular occurrence is not overlapped
/// by any of the entry's stop phrases; a stop phrase elsewhere in the
/// text does not veto.
inline std::set<std::string> extract_labels(std::string_view text, const FeatureLexicon& lexicon) {
    std::set<std::string> out;
    const std::vector<std::string> tokens = text::tokenize(text);
    if (tokens.empty()) return out;
    for (const LexiconEntry& entry : lexicon.entries()) {
        std::vector<text::Span> stop_spans;
        for (const auto& stop : entry.stop_phrases) {
            const auto found = text::find_phrase(tokens, stop);
            stop_spans.insert(stop_spans.end(), found.begin(), found.end());
        }
        bool fired = false;
        for (const auto& flag : entry.flag_phrases) {
            for (const text::Span& span : text::find_phrase(tokens, flag)) {
                const bool vetoed = std::any_of(
                    stop_spans.begin(), stop_spans.end(),
                    [&](const text::Span& stop) { return stop.overlaps(span); });
                if (!vetoed) {
                    fired = true;
                    break;
                }
            }
            if (fired) break;
        }
        if (fired) out.insert(entry.label);
    }
    return out;
}

enum class ScalingMode { Binary, OccurrencePct };

/// Date-indexed numeric matrix of the modeled series: indicator columns
/// in lexicon order, then the target column last.
struct FeatureMatrix {
    std::vector<Date> dates;
    std::vector<std::string> labels;
    Matrix values;  // rows = dates, cols = labels
    ScalingMode scaling_mode = ScalingMode::Binary;

    std::size_t row_count() const { return dates.size(); }
    std::size_t col_count() const { return labels.size(); }

    /// The forecast target is by convention the last column.
    std::size_t target_column() const { return labels.size() - 1; }

    std::optional<std::size_t> column_of(std::string_view label) const {
        for (std::size_t j = 0; j < labels.size(); ++j)
            if (labels[j] == label) return j;
        return std::nullopt;
    }

    bool operator==(const FeatureMatrix&) const = default;
};

/// Binary indicator matrix per day, target appended from total_kwh.
/// Records must already be imputed: a missing total is an error here
/// rather than a silent hole in the estimation sample.
inline FeatureMatrix build_feature_matrix(const PlantDataset& ds, const FeatureLexicon& lexicon) {
    if (ds.records.empty()) throw EmptyDataset();
    FeatureMatrix fm;
    fm.labels = lexicon.labels();
    fm.labels.emplace_back(kTargetLabel);
    fm.dates.reserve(ds.records.size());
    fm.values = Matrix(ds.records.size(), fm.labels.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const DailyRecord& rec = ds.records[i];
        fm.dates.push_back(rec.date);
        const auto fired = extract_labels(rec.issues_text, lexicon);
        for (std::size_t j = 0; j < lexicon.size(); ++j)
            fm.values(i, j) = fired.count(fm.labels[j]) ? 1.0 : 0.0;
        if (!rec.total_kwh)
            throw DataError("record " + rec.date.to_string() +
                            " has no total_kwh; impute the dataset before featurizing");
        fm.values(i, fm.labels.size() - 1) = *rec.total_kwh;
    }
    return fm;
}

/// Replaces each indicator 1 with the column's occurrence percentage
/// (100 * ones / rows); zeros and the target column are untouched.
inline FeatureMatrix occurrence_scale(const FeatureMatrix& fm) {
    if (fm.scaling_mode == ScalingMode::OccurrencePct) throw AlreadyScaled();
    FeatureMatrix out = fm;
    out.scaling_mode = ScalingMode::OccurrencePct;
    const std::size_t n = fm.row_count();
    if (n == 0) return out;
    for (std::size_t j = 0; j + 1 < fm.col_count(); ++j) {
        std::size_t ones = 0;
        for (std::size_t i = 0; i < n; ++i) ones += fm.values(i, j) != 0.0;
        if (ones == 0) continue;
        const double pct = 100.0 * static_cast<double>(ones) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            if (fm.values(i, j) != 0.0) out.values(i, j) = pct;
    }
    return out;
}

/// CSV export: `date` first, then the labels in matrix order.
inline std::string write_feature_matrix_csv(const FeatureMatrix& fm) {
    std::string out;
    std::vector<std::string> fields;
    fields.emplace_back("date");
    for (const std::string& label : fm.labels) fields.push_back(label);
    out += csv::join_row(fields);
    out += '\n';
    for (std::size_t i = 0; i < fm.row_count(); ++i) {
        fields.clear();
        fields.push_back(fm.dates[i].to_string());
        for (std::size_t j = 0; j < fm.col_count(); ++j)
            fields.push_back(format_double(fm.values(i, j)));
        out += csv::join_row(fields);
        out += '\n';
    }
    return out;
}

/// Strict counterpart of write_feature_matrix_csv: every cell must parse,
/// dates must be ISO and strictly increasing.
inline FeatureMatrix load_feature_matrix_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw EmptyFile(path);
    const auto& header = rows.front();
    if (header.size() < 2 || trim(header[0]) != "date")
        throw DataError("feature matrix '" + path + "' must start with a 'date' column");
    FeatureMatrix fm;
    for (std::size_t j = 1; j < header.size(); ++j) fm.labels.emplace_back(trim(header[j]));
    fm.values = Matrix(rows.size() - 1, fm.labels.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw DataError("feature matrix '" + path + "' row " + std::to_string(r + 1) +
                            ": expected " + std::to_string(header.size()) + " cells");
        const auto date = parse_date(trim(row[0]));
        if (!date)
            throw DataError("feature matrix '" + path + "' row " + std::to_string(r + 1) +
                            ": bad date '" + row[0] + "'");
        if (!fm.dates.empty() && !(fm.dates.back() < *date))
            throw DataError("feature matrix '" + path + "' row " + std::to_string(r + 1) +
                            ": dates must be strictly increasing");
        fm.dates.push_back(*date);
        for (std::size_t j = 1; j < row.size(); ++j) {
            const auto v = parse_double(trim(row[j]));
            if (!v || !std::isfinite(*v))
                throw DataError("feature matrix '" + path + "' row " + std::to_string(r + 1) +
                                ": bad numeric '" + row[j] + "'");
            fm.values(r - 1, j - 1) = *v;
        }
    }
    if (fm.row_count() == 0) throw EmptyDataset();
    return fm;
}

/// Column subset in the given order; labels must exist.
inline FeatureMatrix select_columns(const FeatureMatrix& fm,
                                    const std::vector<std::string>& labels) {
    FeatureMatrix out;
    out.dates = fm.dates;
    out.labels = labels;
    out.scaling_mode = fm.scaling_mode;
    out.values = Matrix(fm.row_count(), labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const auto src = fm.column_of(labels[j]);
        if (!src) throw DataError("column '" + labels[j] + "' not present in feature matrix");
        for (std::size_t i = 0; i < fm.row_count(); ++i) out.values(i, j) = fm.values(i, *src);
    }
    return out;
}

}  // namespace maintvar
