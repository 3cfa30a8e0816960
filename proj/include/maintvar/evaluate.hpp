#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maintvar/csv.hpp"
#include "maintvar/errors.hpp"
#include "maintvar/matrix.hpp"
#include "maintvar/rng.hpp"
#include "maintvar/textfeat.hpp"
#include "maintvar/varmodel.hpp"

namespace maintvar {

inline constexpr std::array<std::size_t, 6> kDefaultHorizons = {3, 5, 7, 10, 12, 30};

namespace detail {

inline void check_pair(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw LengthMismatch(actual.size(), predicted.size());
    if (actual.empty()) throw EmptyInput();
}

}  // namespace detail

inline double rmse(std::span<const double> actual, std::span<const double> predicted) {
    detail::check_pair(actual, predicted);
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(actual.size()));
}

inline double mae(std::span<const double> actual, std::span<const double> predicted) {
    detail::check_pair(actual, predicted);
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) s += std::fabs(actual[i] - predicted[i]);
    return s / static_cast<double>(actual.size());
}

/// Root-mean-square percentage error, in percent. A zero actual makes the
/// ratio undefined; by default that is an error, with `skip_zero_actuals`
/// those pairs are left out instead.
inline double rmspe(std::span<const double> actual, std::span<const double> predicted,
                    bool skip_zero_actuals = false) {
    detail::check_pair(actual, predicted);
    double s = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) {
            if (!skip_zero_actuals) throw ZeroActual(i);
            continue;
        }
        const double r = (actual[i] - predicted[i]) / actual[i];
        s += r * r;
        ++used;
    }
    if (used == 0) throw EmptyInput();
    return 100.0 * std::sqrt(s / static_cast<double>(used));
}

/// Generator spec for synthetic VAR data; the independent oracle the
/// estimator and backtest tests are checked against.
struct SyntheticSpec {
    std::size_t k = 0;
    std::size_t p = 0;
    std::vector<double> alpha;
    std::vector<Matrix> beta;
    Matrix innovation_cov;  // K x K, positive semi-definite
    std::size_t t = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> labels;  // defaults to var_1..var_K

    /// Thresholding rule turning a continuous column into a {0,1}
    /// maintenance-style indicator.
    struct Threshold {
        std::size_t column = 0;
        double cutoff = 0.0;
    };
    std::vector<Threshold> binary_columns;

    static Matrix diagonal_cov(const std::vector<double>& sds) {
        Matrix cov(sds.size(), sds.size());
        for (std::size_t i = 0; i < sds.size(); ++i) cov(i, i) = sds[i] * sds[i];
        return cov;
    }
};

/// Draws a seeded sample path of the spec's VAR: start at the implied
/// mean, iterate with counter-based Gaussian innovations, drop 200
/// burn-in rows, then apply any thresholding rules. Identical spec and
/// seed give bit-identical output.
inline FeatureMatrix simulate_var(const SyntheticSpec& spec) {
    if (spec.k == 0 || spec.p == 0 || spec.beta.size() != spec.p ||
        spec.alpha.size() != spec.k)
        throw DataError("simulate_var: inconsistent spec dimensions");
    if (spec.t <= 10 * spec.p)
        throw InsufficientRows("simulate_var: t must exceed 10 * p");
    const double rho = spectral_radius_estimate(companion_matrix(spec.beta));
    if (rho >= 1.0 - 1e-6) throw UnstableSpec(rho);

    const Matrix chol = psd_factor(spec.innovation_cov);
    const std::vector<double> mean = implied_mean(spec.alpha, spec.beta);

    CounterRng rng = CounterRng::derive(spec.seed, 0x73696d756c617465ULL);

    const std::size_t burn_in = 200;
    const std::size_t steps = burn_in + spec.t;
    std::vector<std::vector<double>> recent(spec.p, mean);

    FeatureMatrix fm;
    fm.labels = spec.labels;
    if (fm.labels.empty())
        for (std::size_t j = 0; j < spec.k; ++j) fm.labels.push_back("var_" + std::to_string(j + 1));
    if (fm.labels.size() != spec.k) throw DataError("simulate_var: label count != k");
    fm.values = Matrix(spec.t, spec.k);
    fm.dates.reserve(spec.t);

    std::vector<double> shock(spec.k), z(spec.k);
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t j = 0; j < spec.k; ++j) z[j] = rng.next_gaussian();
        for (std::size_t i = 0; i < spec.k; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += chol(i, j) * z[j];
            shock[i] = s;
        }
        std::vector<double> next(spec.k);
        for (std::size_t i = 0; i < spec.k; ++i) {
            double v = spec.alpha[i];
            for (std::size_t l = 1; l <= spec.p; ++l) {
                const std::vector<double>& lagged = recent[recent.size() - l];
                for (std::size_t j = 0; j < spec.k; ++j) v += spec.beta[l - 1](i, j) * lagged[j];
            }
            next[i] = v + shock[i];
        }
        if (step >= burn_in) {
            const std::size_t row = step - burn_in;
            for (std::size_t j = 0; j < spec.k; ++j) fm.values(row, j) = next[j];
        }
        recent.push_back(std::move(next));
        recent.erase(recent.begin());
    }

    const Date start = Date::from_ymd(2012, 1, 1);
    for (std::size_t i = 0; i < spec.t; ++i) fm.dates.push_back(Date{start.serial + static_cast<std::int32_t>(i)});

    for (const auto& rule : spec.binary_columns) {
        if (rule.column >= spec.k) throw DataError("simulate_var: threshold column out of range");
        for (std::size_t i = 0; i < spec.t; ++i)
            fm.values(i, rule.column) = fm.values(i, rule.column) > rule.cutoff ? 1.0 : 0.0;
    }
    return fm;
}

struct HorizonResult {
    std::size_t horizon = 0;
    double rmspe_pct = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::size_t p_used = 0;
    std::size_t train_rows = 0;
    std::vector<Date> dates;        // held-out dates
    std::vector<double> actual;     // target column
    std::vector<double> forecast;   // target column
    Matrix forecast_all;            // h x K, every variable's forecast
};

struct EvaluationReport {
    std::vector<std::string> labels;
    std::vector<HorizonResult> horizons;  // ascending by horizon
};

namespace detail {

inline FeatureMatrix head_rows(const FeatureMatrix& fm, std::size_t n) {
    FeatureMatrix out;
    out.labels = fm.labels;
    out.scaling_mode = fm.scaling_mode;
    out.dates.assign(fm.dates.begin(), fm.dates.begin() + static_cast<std::ptrdiff_t>(n));
    out.values = Matrix(n, fm.col_count());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < fm.col_count(); ++j) out.values(i, j) = fm.values(i, j);
    return out;
}

}  // namespace detail

/// Hold-out-tail backtest: for each horizon h the final h rows are held
/// out, the lag order is reselected and the model refit on the prefix,
/// and the h-step forecast of the target (last) column is scored.
inline EvaluationReport backtest(const FeatureMatrix& fm, std::vector<std::size_t> horizons,
                                 std::size_t p_max) {
    if (horizons.empty()) throw DataError("backtest: no horizons given");
    for (std::size_t h : horizons)
        if (h == 0) throw DataError("backtest: horizons must be positive");
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

    const std::size_t max_h = horizons.back();
    if (fm.row_count() <= p_max + max_h + 30)
        throw InsufficientRows("backtest needs more than p_max + max(horizons) + 30 = " +
                               std::to_string(p_max + max_h + 30) + " rows, got " +
                               std::to_string(fm.row_count()));

    EvaluationReport report;
    report.labels = fm.labels;
    const std::size_t target = fm.target_column();
    for (std::size_t h : horizons) {
        const std::size_t train_rows = fm.row_count() - h;
        const FeatureMatrix train = detail::head_rows(fm, train_rows);
        const LagSelection sel = select_lag_order(train, p_max);
        const VarModel model = fit_var(train, sel.p_star);
        const Matrix fc = forecast(model, train, h);

        HorizonResult res;
        res.horizon = h;
        res.p_used = sel.p_star;
        res.train_rows = train_rows;
        res.forecast_all = fc;
        for (std::size_t i = 0; i < h; ++i) {
            res.dates.push_back(fm.dates[train_rows + i]);
            res.actual.push_back(fm.values(train_rows + i, target));
            res.forecast.push_back(fc(i, target));
        }
        res.rmspe_pct = rmspe(res.actual, res.forecast);
        res.rmse = rmse(res.actual, res.forecast);
        res.mae = mae(res.actual, res.forecast);
        report.horizons.push_back(std::move(res));
    }
    return report;
}

/// Summary table in the shape Days, RMSPE, RMSE, MAE.
inline std::string write_report_csv(const EvaluationReport& report) {
    std::string out = "Days,RMSPE,RMSE,MAE\n";
    for (const HorizonResult& row : report.horizons) {
        out += std::to_string(row.horizon);
        out += ',' + format_double(row.rmspe_pct);
        out += ',' + format_double(row.rmse);
        out += ',' + format_double(row.mae);
        out += '\n';
    }
    return out;
}

inline std::string write_series_csv(const HorizonResult& res) {
    std::string out = "date,actual,forecast\n";
    for (std::size_t i = 0; i < res.dates.size(); ++i) {
        out += res.dates[i].to_string();
        out += ',' + format_double(res.actual[i]);
        out += ',' + format_double(res.forecast[i]);
        out += '\n';
    }
    return out;
}

/// Forecasts of every variable in the system, one column per label.
/// These are exported for inspection but only the target is scored.
inline std::string write_forecast_variables_csv(const EvaluationReport& report,
                                                const HorizonResult& res) {
    std::string out = "date";
    for (const std::string& label : report.labels) out += ',' + csv::quote(label);
    out += '\n';
    for (std::size_t i = 0; i < res.dates.size(); ++i) {
        out += res.dates[i].to_string();
        for (std::size_t j = 0; j < res.forecast_all.cols(); ++j)
            out += ',' + format_double(res.forecast_all(i, j));
        out += '\n';
    }
    return out;
}

}  // namespace maintvar
