#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maintvar/csv.hpp"
#include "maintvar/errors.hpp"
#include "maintvar/matrix.hpp"
#include "maintvar/special.hpp"
#include "maintvar/textfeat.hpp"

namespace maintvar {

namespace detail {

inline bool is_constant(std::span<const double> xs) {
    for (double v : xs)
        if (v != xs[0]) return false;
    return true;
}

struct OlsFit {
    std::vector<double> coef;
    double rss = 0.0;
    std::size_t nobs = 0;
    std::size_t nparams = 0;
    std::vector<double> normal_inv_diag;  // filled only when requested
};

inline OlsFit ols(const Matrix& design, std::span<const double> response, bool want_se) {
    QrLeastSquares qr(design);
    if (const auto bad = qr.deficient_column())
        throw RankDeficientDesign("design column " + std::to_string(*bad));
    OlsFit fit;
    fit.coef = qr.solve(response);
    fit.nobs = design.rows();
    fit.nparams = design.cols();
    for (std::size_t i = 0; i < design.rows(); ++i) {
        double fitted = 0.0;
        for (std::size_t j = 0; j < design.cols(); ++j) fitted += design(i, j) * fit.coef[j];
        const double r = response[i] - fitted;
        fit.rss += r * r;
    }
    if (want_se) fit.normal_inv_diag = qr.normal_inverse_diagonal();
    return fit;
}

}  // namespace detail

struct StationarityResult {
    double statistic = 0.0;       ///< t-ratio on the lagged level
    std::size_t lags_used = 0;    ///< differenced lags chosen by AIC
    double critical_value_1pct = 0.0;
    double critical_value_5pct = 0.0;
    double critical_value_10pct = 0.0;
    bool is_stationary_5pct = false;
};

namespace detail {

// Dickey-Fuller critical values, constant-only regression. Rows are the
// classic finite-sample table; lookups interpolate linearly in 1/n and
// clamp outside [25, inf). Quoted precision is about +-0.01.
struct DfRow {
    double inv_n;
    double cv1, cv5, cv10;
};

inline constexpr DfRow kDfConstantTable[] = {
    {1.0 / 25.0, -3.75, -3.00, -2.63},
    {1.0 / 50.0, -3.58, -2.93, -2.60},
    {1.0 / 100.0, -3.51, -2.89, -2.58},
    {1.0 / 250.0, -3.46, -2.88, -2.57},
    {1.0 / 500.0, -3.44, -2.87, -2.57},
    {0.0, -3.43, -2.86, -2.57},
};

inline void df_critical_values(std::size_t n, double& cv1, double& cv5, double& cv10) {
    const double x = 1.0 / static_cast<double>(n);
    const auto& table = kDfConstantTable;
    if (x >= table[0].inv_n) {
        cv1 = table[0].cv1, cv5 = table[0].cv5, cv10 = table[0].cv10;
        return;
    }
    for (std::size_t i = 1; i < std::size(table); ++i) {
        if (x >= table[i].inv_n) {
            const DfRow& hi = table[i - 1];
            const DfRow& lo = table[i];
            const double t = (x - lo.inv_n) / (hi.inv_n - lo.inv_n);
            cv1 = lo.cv1 + t * (hi.cv1 - lo.cv1);
            cv5 = lo.cv5 + t * (hi.cv5 - lo.cv5);
            cv10 = lo.cv10 + t * (hi.cv10 - lo.cv10);
            return;
        }
    }
    cv1 = table[std::size(table) - 1].cv1;
    cv5 = table[std::size(table) - 1].cv5;
    cv10 = table[std::size(table) - 1].cv10;
}

/// Design for the constant-case test regression
///   dx_t = c + phi * x_{t-1} + sum_i gamma_i dx_{t-i}
/// over t = first_t .. n-1 (indices into the level series).
inline Matrix adf_design(std::span<const double> x, std::size_t p, std::size_t first_t) {
    const std::size_t nobs = x.size() - first_t;
    Matrix design(nobs, 2 + p);
    for (std::size_t r = 0; r < nobs; ++r) {
        const std::size_t t = first_t + r;
        design(r, 0) = 1.0;
        design(r, 1) = x[t - 1];
        for (std::size_t i = 1; i <= p; ++i) design(r, 1 + i) = x[t - i] - x[t - i - 1];
    }
    return design;
}

inline std::vector<double> adf_response(std::span<const double> x, std::size_t first_t) {
    std::vector<double> dy(x.size() - first_t);
    for (std::size_t r = 0; r < dy.size(); ++r) {
        const std::size_t t = first_t + r;
        dy[r] = x[t] - x[t - 1];
    }
    return dy;
}

}  // namespace detail

/// Augmented Dickey-Fuller test with a constant. The differenced-lag
/// order is chosen by AIC over 0..max_lag on a common sample, then the
/// statistic comes from a refit on the full span available for that
/// order. The null is a unit root, so rejection (statistic below the
/// critical value) means stationary.
inline StationarityResult adf_test(std::span<const double> series, std::size_t max_lag) {
    if (detail::is_constant(series)) throw ConstantSeries("adf_test input");
    if (series.size() < 20 + max_lag)
        throw SeriesTooShort("adf_test needs at least 20 + max_lag = " +
                             std::to_string(20 + max_lag) + " observations, got " +
                             std::to_string(series.size()));
    const std::size_t select_first_t = max_lag + 1;
    const std::size_t select_nobs = series.size() - select_first_t;
    if (select_nobs < max_lag + 2 + 8)
        throw SeriesTooShort("adf_test: max_lag too large for series length");

    const auto dy = detail::adf_response(series, select_first_t);
    double best_aic = std::numeric_limits<double>::infinity();
    std::size_t best_p = 0;
    for (std::size_t p = 0; p <= max_lag; ++p) {
        const Matrix design = detail::adf_design(series, p, select_first_t);
        const auto fit = detail::ols(design, dy, false);
        const double n = static_cast<double>(fit.nobs);
        const double aic = std::log(fit.rss / n) + 2.0 * static_cast<double>(fit.nparams) / n;
        if (aic < best_aic) {
            best_aic = aic;
            best_p = p;
        }
    }

    const std::size_t first_t = best_p + 1;
    const Matrix design = detail::adf_design(series, best_p, first_t);
    const auto response = detail::adf_response(series, first_t);
    const auto fit = detail::ols(design, response, true);
    const double sigma2 = fit.rss / static_cast<double>(fit.nobs - fit.nparams);
    const double se = std::sqrt(sigma2 * fit.normal_inv_diag[1]);

    StationarityResult result;
    result.statistic = fit.coef[1] / se;
    result.lags_used = best_p;
    detail::df_critical_values(fit.nobs, result.critical_value_1pct, result.critical_value_5pct,
                               result.critical_value_10pct);
    result.is_stationary_5pct = result.statistic < result.critical_value_5pct;
    return result;
}

struct CorrelationMatrix {
    std::vector<std::string> labels;
    Matrix values;                      // NaN where undefined
    std::vector<bool> constant_column;  // flags columns with zero variance

    bool defined(std::size_t i, std::size_t j) const {
        return !constant_column[i] && !constant_column[j];
    }
};

/// Pairwise Pearson coefficients. Constant columns are flagged and their
/// pairs marked undefined (NaN) instead of dividing by a zero variance.
inline CorrelationMatrix pearson_correlation(const FeatureMatrix& fm) {
    const std::size_t n = fm.row_count();
    const std::size_t k = fm.col_count();
    if (n < 2) throw SeriesTooShort("pearson_correlation needs at least 2 rows");
    CorrelationMatrix cm;
    cm.labels = fm.labels;
    cm.values = Matrix(k, k, std::numeric_limits<double>::quiet_NaN());
    cm.constant_column.resize(k, false);

    std::vector<double> mean(k, 0.0), ss(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) mean[j] += fm.values(i, j);
        mean[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = fm.values(i, j) - mean[j];
            ss[j] += d * d;
        }
        cm.constant_column[j] = ss[j] == 0.0;
    }
    for (std::size_t a = 0; a < k; ++a) {
        if (cm.constant_column[a]) continue;
        cm.values(a, a) = 1.0;
        for (std::size_t b = a + 1; b < k; ++b) {
            if (cm.constant_column[b]) continue;
            double cov = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                cov += (fm.values(i, a) - mean[a]) * (fm.values(i, b) - mean[b]);
            const double r = std::clamp(cov / std::sqrt(ss[a] * ss[b]), -1.0, 1.0);
            cm.values(a, b) = r;
            cm.values(b, a) = r;
        }
    }
    return cm;
}

struct CausalityResult {
    std::string cause;
    std::string effect;
    std::size_t lag = 0;
    double f_statistic = 0.0;
    double p_value = 1.0;
    std::size_t df_num = 0;
    std::size_t df_den = 0;
};

/// Granger F-test: does adding `cause`'s first `lag` lags to a regression
/// of `effect` on its own lags reduce the residual sum of squares more
/// than chance would? Small p-value = predictive precedence.
inline CausalityResult granger_causality(std::span<const double> cause,
                                         std::span<const double> effect, std::size_t lag,
                                         std::string cause_name = "cause",
                                         std::string effect_name = "effect") {
    if (cause.size() != effect.size()) throw LengthMismatch(cause.size(), effect.size());
    if (lag == 0) throw DataError("granger_causality: lag must be positive");
    if (effect.size() <= 3 * lag + 3)
        throw SeriesTooShort("granger_causality needs more than 3*lag + 3 = " +
                             std::to_string(3 * lag + 3) + " observations, got " +
                             std::to_string(effect.size()));
    if (detail::is_constant(cause)) throw ConstantSeries(cause_name);
    if (detail::is_constant(effect)) throw ConstantSeries(effect_name);

    const std::size_t t_eff = effect.size() - lag;
    Matrix restricted(t_eff, 1 + lag);
    Matrix unrestricted(t_eff, 1 + 2 * lag);
    std::vector<double> response(t_eff);
    for (std::size_t r = 0; r < t_eff; ++r) {
        const std::size_t t = lag + r;
        response[r] = effect[t];
        restricted(r, 0) = 1.0;
        unrestricted(r, 0) = 1.0;
        for (std::size_t i = 1; i <= lag; ++i) {
            restricted(r, i) = effect[t - i];
            unrestricted(r, i) = effect[t - i];
            unrestricted(r, lag + i) = cause[t - i];
        }
    }
    const auto fit_r = detail::ols(restricted, response, false);
    const auto fit_u = detail::ols(unrestricted, response, false);

    CausalityResult result;
    result.cause = std::move(cause_name);
    result.effect = std::move(effect_name);
    result.lag = lag;
    result.df_num = lag;
    result.df_den = t_eff - 2 * lag - 1;
    const double num = std::max(fit_r.rss - fit_u.rss, 0.0) / static_cast<double>(lag);
    const double den = fit_u.rss / static_cast<double>(result.df_den);
    if (den <= 0.0) {
        result.f_statistic = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        result.p_value = num > 0.0 ? 0.0 : 1.0;
        return result;
    }
    result.f_statistic = num / den;
    result.p_value = f_upper_tail(result.f_statistic, static_cast<double>(result.df_num),
                                  static_cast<double>(result.df_den));
    return result;
}

struct ScreeningRow {
    std::string label;
    bool is_target = false;
    bool constant = false;
    double correlation = std::numeric_limits<double>::quiet_NaN();  // with target
    double best_granger_p = std::numeric_limits<double>::quiet_NaN();
    std::size_t best_lag = 0;
    bool selected = false;
};

/// Correlation and causality screening of every indicator against the
/// target. An indicator survives when |Pearson r| clears the threshold
/// or some lag up to max_lag Granger-causes the target at level alpha.
inline std::vector<ScreeningRow> screen_features(const FeatureMatrix& fm,
                                                 const std::string& target,
                                                 double corr_threshold, double alpha,
                                                 std::size_t max_lag) {
    const auto target_col = fm.column_of(target);
    if (!target_col) throw TargetMissing(target);
    const CorrelationMatrix cm = pearson_correlation(fm);
    if (cm.constant_column[*target_col]) throw ConstantSeries("target '" + target + "'");
    const std::vector<double> target_series = fm.values.column(*target_col);

    std::vector<ScreeningRow> rows;
    rows.reserve(fm.col_count());
    for (std::size_t j = 0; j < fm.col_count(); ++j) {
        ScreeningRow row;
        row.label = fm.labels[j];
        if (j == *target_col) {
            row.is_target = true;
            row.correlation = 1.0;
            row.selected = true;
            rows.push_back(std::move(row));
            continue;
        }
        row.constant = cm.constant_column[j];
        if (!row.constant) {
            row.correlation = cm.values(j, *target_col);
            const std::vector<double> indicator = fm.values.column(j);
            for (std::size_t lag = 1; lag <= max_lag; ++lag) {
                if (indicator.size() <= 3 * lag + 3) break;
                // A lag can be degenerate even when the full series is not
                // (e.g. an indicator firing only inside the last `lag`
                // rows leaves an all-zero regressor); skip such lags.
                try {
                    const auto gc =
                        granger_causality(indicator, target_series, lag, row.label, target);
                    if (std::isnan(row.best_granger_p) || gc.p_value < row.best_granger_p) {
                        row.best_granger_p = gc.p_value;
                        row.best_lag = lag;
                    }
                } catch (const Error&) {
                    continue;
                }
            }
            const bool by_corr = std::fabs(row.correlation) >= corr_threshold;
            const bool by_granger = !std::isnan(row.best_granger_p) && row.best_granger_p < alpha;
            row.selected = by_corr || by_granger;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Surviving labels: target first, then selected indicators by descending
/// |correlation| with ties kept in matrix (lexicon) order.
inline std::vector<std::string> select_features(const FeatureMatrix& fm,
                                                const std::string& target, double corr_threshold,
                                                double alpha, std::size_t max_lag) {
    const auto rows = screen_features(fm, target, corr_threshold, alpha, max_lag);
    std::vector<const ScreeningRow*> picked;
    for (const auto& row : rows)
        if (row.selected && !row.is_target) picked.push_back(&row);
    std::stable_sort(picked.begin(), picked.end(), [](const ScreeningRow* a, const ScreeningRow* b) {
        return std::fabs(a->correlation) > std::fabs(b->correlation);
    });
    std::vector<std::string> out;
    out.push_back(target);
    for (const ScreeningRow* row : picked) out.push_back(row->label);
    return out;
}

inline std::string write_screening_csv(const std::vector<ScreeningRow>& rows) {
    std::string out = "label,correlation,best_granger_p,best_lag,selected\n";
    for (const ScreeningRow& row : rows) {
        std::vector<std::string> fields;
        fields.push_back(row.label);
        fields.push_back(std::isnan(row.correlation) ? "" : format_double(row.correlation));
        fields.push_back(std::isnan(row.best_granger_p) ? "" : format_double(row.best_granger_p));
        fields.push_back(row.best_lag == 0 ? "" : std::to_string(row.best_lag));
        fields.push_back(row.selected ? "1" : "0");
        out += csv::join_row(fields);
        out += '\n';
    }
    return out;
}

}  // namespace maintvar
