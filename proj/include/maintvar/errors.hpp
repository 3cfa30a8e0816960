#pragma once

#include <stdexcept>
#include <string>

namespace maintvar {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input data is malformed, inconsistent, or insufficient.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

/// A numeric procedure cannot proceed (singularity, instability, ...).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

// ---- ingest ----

class MissingColumn : public DataError {
public:
    explicit MissingColumn(const std::string& logical, const std::string& header)
        : DataError("missing column: logical column '" + logical + "' mapped to header '" +
                    header + "' not found in file header"),
          logical_name(logical) {}
    std::string logical_name;
};

class EmptyFile : public DataError {
public:
    explicit EmptyFile(const std::string& path)
        : DataError("empty file: '" + path + "' has no header row") {}
};

class DuplicateDate : public DataError {
public:
    explicit DuplicateDate(const std::string& date)
        : DataError("duplicate date: " + date + " appears more than once") {}
};

class LeadingGap : public DataError {
public:
    explicit LeadingGap(const std::string& column)
        : DataError("leading gap: column '" + column +
                    "' starts with a missing value, forward fill impossible") {}
};

class AllMissingColumn : public DataError {
public:
    explicit AllMissingColumn(const std::string& column)
        : DataError("column '" + column + "' has no present values, cannot impute") {}
};

// ---- textfeat ----

class EmptyDataset : public DataError {
public:
    EmptyDataset() : DataError("dataset has no records") {}
};

class AlreadyScaled : public DataError {
public:
    AlreadyScaled() : DataError("feature matrix is already occurrence-scaled") {}
};

// ---- statcheck ----

class SeriesTooShort : public DataError {
public:
    explicit SeriesTooShort(const std::string& detail)
        : DataError("series too short: " + detail) {}
};

class ConstantSeries : public DataError {
public:
    explicit ConstantSeries(const std::string& which)
        : DataError("constant series: " + which) {}
};

class TargetMissing : public DataError {
public:
    explicit TargetMissing(const std::string& label)
        : DataError("target column '" + label + "' not present in feature matrix") {}
};

// ---- varmodel / evaluate ----

class InsufficientRows : public DataError {
public:
    explicit InsufficientRows(const std::string& detail)
        : DataError("insufficient rows: " + detail) {}
};

class RankDeficientDesign : public NumericError {
public:
    explicit RankDeficientDesign(const std::string& column)
        : NumericError("rank-deficient design: column '" + column +
                       "' is linearly dependent on earlier regressors"),
          column_name(column) {}
    std::string column_name;
};

class SingularSigma : public NumericError {
public:
    SingularSigma()
        : NumericError("residual covariance is singular, log-determinant undefined") {}
};

class HistoryTooShort : public DataError {
public:
    explicit HistoryTooShort(std::size_t have, std::size_t need)
        : DataError("history too short: " + std::to_string(have) + " rows, need at least " +
                    std::to_string(need)) {}
};

class UnstableSpec : public NumericError {
public:
    explicit UnstableSpec(double rho)
        : NumericError("synthetic model is not stable: spectral radius estimate " +
                       std::to_string(rho)) {}
};

// ---- rfimpact ----

class TooFewRows : public DataError {
public:
    explicit TooFewRows(std::size_t have, std::size_t need)
        : DataError("too few rows: " + std::to_string(have) + ", need at least " +
                    std::to_string(need)) {}
};

class NoFeatures : public DataError {
public:
    NoFeatures() : DataError("no feature columns supplied") {}
};

class DimensionMismatch : public DataError {
public:
    explicit DimensionMismatch(std::size_t got, std::size_t want)
        : DataError("dimension mismatch: got " + std::to_string(got) + " values, expected " +
                    std::to_string(want)) {}
};

// ---- evaluate ----

class LengthMismatch : public DataError {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : DataError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class EmptyInput : public DataError {
public:
    EmptyInput() : DataError("empty input sequence") {}
};

class ZeroActual : public DataError {
public:
    explicit ZeroActual(std::size_t index)
        : DataError("actual value at index " + std::to_string(index) +
                    " is zero, percentage error undefined (enable zero-skip to ignore)") {}
};

// ---- plotting ----

class EmptySeries : public DataError {
public:
    EmptySeries() : DataError("cannot plot an empty series") {}
};

}  // namespace maintvar
