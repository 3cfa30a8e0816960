#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "maintvar/csv.hpp"
#include "maintvar/errors.hpp"
#include "maintvar/matrix.hpp"
#include "maintvar/textfeat.hpp"

namespace maintvar {

/// Fitted VAR(p): one least-squares equation per variable, each variable
/// regressed on the first p lags of every variable plus an intercept.
struct VarModel {
    std::vector<std::string> labels;  // K variable names
    std::size_t p = 0;
    std::vector<double> alpha;        // intercepts, length K
    std::vector<Matrix> beta;         // p matrices; beta[l](i, j) multiplies
                                      // variable j at lag l+1 in equation i
    Matrix residuals;                 // t_eff x K
    Matrix sigma;                     // K x K, maximum-likelihood divisor t_eff
    std::size_t t_eff = 0;
    double response_scale = 0.0;      // RMS of the fitted responses; zero for
                                      // hand-built models

    std::size_t k() const { return labels.size(); }
};

struct ModelSelectionRecord {
    std::size_t candidate_p = 0;
    double aic = 0.0;
    std::size_t k_params = 0;
    double log_det_sigma = 0.0;
};

namespace detail {

/// Shared estimator: predicts rows first_row..T-1 from p lags each, so
/// callers can pin a common sample window across candidate orders.
inline VarModel fit_var_window(const FeatureMatrix& fm, std::size_t p, std::size_t first_row) {
    const std::size_t total = fm.row_count();
    const std::size_t k = fm.col_count();
    if (p == 0) throw DataError("fit_var: lag order must be positive");
    if (k < 2) throw DataError("fit_var: need at least 2 variables, got " + std::to_string(k));
    if (first_row < p) throw DataError("fit_var: window starts before p lags are available");
    if (total <= first_row || total - first_row <= k * p + 1)
        throw InsufficientRows("fit_var with p = " + std::to_string(p) + " needs more than " +
                               std::to_string(first_row + k * p + 1) + " rows, got " +
                               std::to_string(total));

    const std::size_t t_eff = total - first_row;
    const std::size_t ncols = 1 + k * p;
    Matrix design(t_eff, ncols);
    Matrix response(t_eff, k);
    for (std::size_t r = 0; r < t_eff; ++r) {
        const std::size_t t = first_row + r;
        design(r, 0) = 1.0;
        for (std::size_t l = 1; l <= p; ++l)
            for (std::size_t j = 0; j < k; ++j)
                design(r, 1 + (l - 1) * k + j) = fm.values(t - l, j);
        for (std::size_t j = 0; j < k; ++j) response(r, j) = fm.values(t, j);
    }

    QrLeastSquares qr(design);
    if (const auto bad = qr.deficient_column()) {
        if (*bad == 0) throw RankDeficientDesign("intercept");
        const std::size_t lag = (*bad - 1) / k + 1;
        const std::size_t var = (*bad - 1) % k;
        throw RankDeficientDesign("lag " + std::to_string(lag) + " of '" + fm.labels[var] + "'");
    }
    const Matrix coef = qr.solve(response);

    VarModel model;
    model.labels = fm.labels;
    model.p = p;
    model.t_eff = t_eff;
    model.alpha.resize(k);
    for (std::size_t i = 0; i < k; ++i) model.alpha[i] = coef(0, i);
    model.beta.assign(p, Matrix(k, k));
    for (std::size_t l = 0; l < p; ++l)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) model.beta[l](i, j) = coef(1 + l * k + j, i);

    model.residuals = Matrix(t_eff, k);
    for (std::size_t r = 0; r < t_eff; ++r)
        for (std::size_t i = 0; i < k; ++i) {
            double fitted = 0.0;
            for (std::size_t c = 0; c < ncols; ++c) fitted += design(r, c) * coef(c, i);
            model.residuals(r, i) = response(r, i) - fitted;
        }
    model.sigma = Matrix(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < t_eff; ++r)
                s += model.residuals(r, a) * model.residuals(r, b);
            s /= static_cast<double>(t_eff);
            model.sigma(a, b) = s;
            model.sigma(b, a) = s;
        }
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < t_eff; ++r)
        for (std::size_t j = 0; j < k; ++j) sum_sq += response(r, j) * response(r, j);
    model.response_scale = std::sqrt(sum_sq / static_cast<double>(t_eff * k));
    return model;
}

}  // namespace detail

/// Least-squares VAR(p) over the full usable sample t = p+1..T.
inline VarModel fit_var(const FeatureMatrix& fm, std::size_t p) {
    return detail::fit_var_window(fm, p, p);
}

/// Multivariate AIC: ln det(sigma) + 2 k_params / t_eff with
/// k_params = K (K p + 1). A singular sigma is reported, never
/// regularized behind the caller's back; residuals at the rounding level
/// of the response magnitude (a noiseless fit) count as singular.
inline ModelSelectionRecord compute_aic(const VarModel& fit) {
    const auto chol = cholesky(fit.sigma);
    if (!chol) throw SingularSigma();
    const double pivot_floor = 1e-14 * fit.response_scale;
    for (std::size_t i = 0; i < fit.k(); ++i)
        if ((*chol)(i, i) <= pivot_floor) throw SingularSigma();
    double log_det = 0.0;
    for (std::size_t i = 0; i < fit.k(); ++i) log_det += 2.0 * std::log((*chol)(i, i));
    ModelSelectionRecord rec;
    rec.candidate_p = fit.p;
    rec.k_params = fit.k() * (fit.k() * fit.p + 1);
    rec.log_det_sigma = log_det;
    rec.aic = log_det + 2.0 * static_cast<double>(rec.k_params) / static_cast<double>(fit.t_eff);
    return rec;
}

struct LagSelection {
    std::size_t p_star = 0;
    std::vector<ModelSelectionRecord> records;
};

/// Fits every candidate order on the common window t = p_max+1..T so the
/// AIC values share one effective sample, then takes the argmin with ties
/// broken toward the smaller order.
inline LagSelection select_lag_order(const FeatureMatrix& fm, std::size_t p_max) {
    if (p_max == 0) throw DataError("select_lag_order: p_max must be positive");
    LagSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= p_max; ++p) {
        const VarModel model = detail::fit_var_window(fm, p, p_max);
        const ModelSelectionRecord rec = compute_aic(model);
        if (rec.aic < best) {
            best = rec.aic;
            sel.p_star = p;
        }
        sel.records.push_back(rec);
    }
    return sel;
}

/// Recursive h-step forecast with innovations set to zero: each step
/// feeds the previous step's prediction back in as if it were observed.
/// `history` must hold at least the last p observed rows, oldest first.
inline Matrix forecast(const VarModel& model, const Matrix& history, std::size_t h) {
    const std::size_t k = model.k();
    if (h == 0) throw DataError("forecast: horizon must be positive");
    if (history.cols() != k) throw DimensionMismatch(history.cols(), k);
    if (history.rows() < model.p) throw HistoryTooShort(history.rows(), model.p);

    // Rolling buffer of the p most recent rows, newest last.
    std::vector<std::vector<double>> recent;
    for (std::size_t r = history.rows() - model.p; r < history.rows(); ++r) {
        std::vector<double> row(k);
        for (std::size_t j = 0; j < k; ++j) row[j] = history(r, j);
        recent.push_back(std::move(row));
    }

    Matrix out(h, k);
    for (std::size_t step = 0; step < h; ++step) {
        std::vector<double> next(k);
        for (std::size_t i = 0; i < k; ++i) {
            double v = model.alpha[i];
            for (std::size_t l = 1; l <= model.p; ++l) {
                const std::vector<double>& lagged = recent[recent.size() - l];
                for (std::size_t j = 0; j < k; ++j) v += model.beta[l - 1](i, j) * lagged[j];
            }
            next[i] = v;
        }
        for (std::size_t j = 0; j < k; ++j) out(step, j) = next[j];
        recent.push_back(std::move(next));
        recent.erase(recent.begin());
    }
    return out;
}

inline Matrix forecast(const VarModel& model, const FeatureMatrix& history, std::size_t h) {
    return forecast(model, history.values, h);
}

/// VAR(p) recast as VAR(1) on the stacked state: coefficient blocks in
/// the first K rows, shifted identity below.
inline Matrix companion_matrix(const std::vector<Matrix>& beta) {
    const std::size_t p = beta.size();
    const std::size_t k = beta.front().rows();
    Matrix comp(k * p, k * p);
    for (std::size_t l = 0; l < p; ++l)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) comp(i, l * k + j) = beta[l](i, j);
    for (std::size_t l = 1; l < p; ++l)
        for (std::size_t i = 0; i < k; ++i) comp(l * k + i, (l - 1) * k + i) = 1.0;
    return comp;
}

struct StabilityResult {
    bool stable = false;
    double spectral_radius = 0.0;
};

/// A model is stable when the companion spectral radius stays below one;
/// unstable fits still forecast, they just diverge with the horizon.
inline StabilityResult is_stable(const VarModel& model) {
    StabilityResult res;
    res.spectral_radius = spectral_radius_estimate(companion_matrix(model.beta));
    res.stable = res.spectral_radius < 1.0 - 1e-6;
    return res;
}

/// Long-run mean (I - sum_l beta_l)^{-1} alpha of a stable model.
inline std::vector<double> implied_mean(const std::vector<double>& alpha,
                                        const std::vector<Matrix>& beta) {
    const std::size_t k = alpha.size();
    Matrix a = Matrix::identity(k);
    for (const Matrix& b : beta)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) a(i, j) -= b(i, j);
    QrLeastSquares qr(a);
    if (qr.deficient_column())
        throw NumericError("implied mean undefined: I - sum(beta) is singular");
    return qr.solve(alpha);
}

/// Flat text serialization, 17 significant digits per value so a reload
/// reproduces every coefficient bit-for-bit.
inline std::string serialize_var_model(const VarModel& model) {
    std::string out = "maintvar-var-model v1\n";
    out += "K " + std::to_string(model.k()) + "\n";
    out += "p " + std::to_string(model.p) + "\n";
    out += "t_eff " + std::to_string(model.t_eff) + "\n";
    for (const std::string& label : model.labels) out += "label " + label + "\n";
    out += "alpha\n";
    for (std::size_t i = 0; i < model.k(); ++i) {
        if (i) out += ' ';
        out += format_double_full(model.alpha[i]);
    }
    out += '\n';
    for (std::size_t l = 0; l < model.p; ++l) {
        out += "beta " + std::to_string(l + 1) + "\n";
        for (std::size_t i = 0; i < model.k(); ++i) {
            for (std::size_t j = 0; j < model.k(); ++j) {
                if (j) out += ' ';
                out += format_double_full(model.beta[l](i, j));
            }
            out += '\n';
        }
    }
    return out;
}

/// Inverse of serialize_var_model. Residuals and sigma are not part of
/// the format; a deserialized model forecasts but cannot be re-scored.
inline VarModel deserialize_var_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line))
            throw DataError(std::string("model file truncated, expected ") + what);
        return std::string_view(trim(line));
    };
    if (next_line("header") != "maintvar-var-model v1")
        throw DataError("not a maintvar model file");

    auto read_kv = [&](const char* key) -> std::string {
        const std::string_view v = next_line(key);
        const std::string prefix = std::string(key) + " ";
        if (v.substr(0, prefix.size()) != prefix)
            throw DataError(std::string("model file: expected '") + key + "' line");
        return std::string(v.substr(prefix.size()));
    };
    auto read_count = [&](const char* key) -> std::size_t {
        const std::string text = read_kv(key);
        std::size_t value = 0;
        const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || p != text.data() + text.size())
            throw DataError(std::string("model file: bad count for '") + key + "'");
        return value;
    };

    VarModel model;
    const std::size_t k = read_count("K");
    model.p = read_count("p");
    model.t_eff = read_count("t_eff");
    for (std::size_t i = 0; i < k; ++i) model.labels.push_back(read_kv("label"));

    auto read_values = [&](const char* what, std::size_t count) {
        std::istringstream row{std::string(next_line(what))};
        std::vector<double> vals;
        std::string tok;
        while (row >> tok) {
            const auto v = parse_double(tok);
            if (!v) throw DataError(std::string("model file: bad numeric in ") + what);
            vals.push_back(*v);
        }
        if (vals.size() != count)
            throw DataError(std::string("model file: wrong value count in ") + what);
        return vals;
    };

    if (next_line("alpha") != "alpha") throw DataError("model file: expected 'alpha'");
    model.alpha = read_values("alpha", k);
    for (std::size_t l = 0; l < model.p; ++l) {
        if (next_line("beta") != "beta " + std::to_string(l + 1))
            throw DataError("model file: expected 'beta " + std::to_string(l + 1) + "'");
        Matrix b(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            const auto vals = read_values("beta row", k);
            for (std::size_t j = 0; j < k; ++j) b(i, j) = vals[j];
        }
        model.beta.push_back(std::move(b));
    }
    return model;
}

}  // namespace maintvar
