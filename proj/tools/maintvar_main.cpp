// Command-line surface for the maintvar pipeline: validate and featurize a
// daily plant log, screen the extracted indicators, fit and forecast the
// VAR, backtest across horizons, and score maintenance impact.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maintvar/maintvar.hpp"

namespace fs = std::filesystem;
using namespace maintvar;

namespace {

struct CommonOptions {
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

std::string out_path(const CommonOptions& common, const std::string& name) {
    fs::create_directories(common.out_dir);
    return (fs::path(common.out_dir) / name).string();
}

void note_written(const std::string& path) { std::cout << "wrote " << path << "\n"; }

Schema load_schema_or_identity(const std::string& path) {
    return path.empty() ? Schema::identity() : Schema::load(path);
}

// ---- validate ----

struct ValidateArgs {
    std::string input;
    std::string schema;
};

int run_validate(const ValidateArgs& args, const CommonOptions& common) {
    const Schema schema = load_schema_or_identity(args.schema);
    const PlantDataset ds = parse_dataset_csv(args.input, schema);
    const auto violations = validate_dataset(ds);

    std::string report = "date,field,rule\n";
    for (const Violation& v : violations)
        report += csv::join_row({v.date.to_string(), v.field, v.rule}) + "\n";
    const std::string path = out_path(common, "validation_report.csv");
    write_text_file(path, report);
    note_written(path);
    std::cout << "parsed " << ds.records.size() << " records, " << ds.gap_report.size()
              << " gap entries, " << violations.size() << " violations\n";
    return 0;
}

// ---- featurize ----

struct FeaturizeArgs {
    std::string input;
    std::string schema;
    std::string lexicon;
    std::string impute = "linear";
    bool scaled = false;
};

int run_featurize(const FeaturizeArgs& args, const CommonOptions& common) {
    const Schema schema = load_schema_or_identity(args.schema);
    const FeatureLexicon lexicon = FeatureLexicon::load(args.lexicon);
    PlantDataset ds = parse_dataset_csv(args.input, schema);
    const auto policy = parse_impute_policy(args.impute);
    if (!policy) throw DataError("unknown imputation policy '" + args.impute + "'");
    ds = impute_missing(ds, *policy);

    FeatureMatrix fm = build_feature_matrix(ds, lexicon);
    if (args.scaled) fm = occurrence_scale(fm);

    const std::string matrix_path = out_path(common, "feature_matrix.csv");
    write_text_file(matrix_path, write_feature_matrix_csv(fm));
    note_written(matrix_path);

    std::string log = "date,labels\n";
    for (const DailyRecord& rec : ds.records) {
        const auto labels = extract_labels(rec.issues_text, lexicon);
        std::string joined;
        for (const std::string& label : labels) {
            if (!joined.empty()) joined += ';';
            joined += label;
        }
        log += csv::join_row({rec.date.to_string(), joined}) + "\n";
    }
    const std::string log_path = out_path(common, "extraction_log.csv");
    write_text_file(log_path, log);
    note_written(log_path);
    return 0;
}

// ---- screen ----

struct ScreenArgs {
    std::string matrix;
    std::string target = std::string(kTargetLabel);
    double corr_threshold = 0.1;
    double alpha = 0.05;
    std::size_t max_lag = 7;
};

int run_screen(const ScreenArgs& args, const CommonOptions& common) {
    const FeatureMatrix fm = load_feature_matrix_csv(args.matrix);
    const auto rows = screen_features(fm, args.target, args.corr_threshold, args.alpha,
                                      args.max_lag);
    const std::string report_path = out_path(common, "screening_report.csv");
    write_text_file(report_path, write_screening_csv(rows));
    note_written(report_path);

    const auto selected =
        select_features(fm, args.target, args.corr_threshold, args.alpha, args.max_lag);
    // Matrix convention keeps the target last; selection lists it first.
    std::vector<std::string> column_order(selected.begin() + 1, selected.end());
    column_order.push_back(selected.front());
    const FeatureMatrix subset = select_columns(fm, column_order);
    const std::string matrix_path = out_path(common, "selected_matrix.csv");
    write_text_file(matrix_path, write_feature_matrix_csv(subset));
    note_written(matrix_path);
    std::cout << "selected " << selected.size() << " of " << fm.col_count() << " columns\n";
    return 0;
}

// ---- forecast ----

struct ForecastArgs {
    std::string matrix;
    std::size_t horizon = 0;
    std::size_t p_max = 14;
    std::size_t fixed_p = 0;  // 0 = select by AIC
};

int run_forecast(const ForecastArgs& args, const CommonOptions& common) {
    const FeatureMatrix fm = load_feature_matrix_csv(args.matrix);
    std::size_t p = args.fixed_p;
    if (p == 0) p = select_lag_order(fm, args.p_max).p_star;
    const VarModel model = fit_var(fm, p);

    const StabilityResult stability = is_stable(model);
    if (!stability.stable)
        std::cerr << "warning: fitted model is unstable (spectral radius "
                  << format_double(stability.spectral_radius)
                  << "); long-horizon forecasts may diverge\n";

    const Matrix fc = forecast(model, fm, args.horizon);
    std::string out = "date";
    for (const std::string& label : fm.labels) out += ',' + csv::quote(label);
    out += '\n';
    Date d = fm.dates.back();
    for (std::size_t i = 0; i < args.horizon; ++i) {
        d = d.next_day();
        out += d.to_string();
        for (std::size_t j = 0; j < fm.col_count(); ++j) out += ',' + format_double(fc(i, j));
        out += '\n';
    }
    const std::string fc_path = out_path(common, "forecast.csv");
    write_text_file(fc_path, out);
    note_written(fc_path);

    const std::string model_path = out_path(common, "model.txt");
    write_text_file(model_path, serialize_var_model(model));
    note_written(model_path);
    std::cout << "fitted VAR(" << p << ") on " << fm.row_count() << " rows\n";
    return 0;
}

// ---- backtest ----

struct BacktestArgs {
    std::string matrix;
    std::vector<std::size_t> horizons{kDefaultHorizons.begin(), kDefaultHorizons.end()};
    std::size_t p_max = 14;
};

int run_backtest(const BacktestArgs& args, const CommonOptions& common) {
    const FeatureMatrix fm = load_feature_matrix_csv(args.matrix);
    const EvaluationReport report = backtest(fm, args.horizons, args.p_max);

    const std::string table_path = out_path(common, "backtest_table.csv");
    write_text_file(table_path, write_report_csv(report));
    note_written(table_path);

    for (const HorizonResult& res : report.horizons) {
        const std::string stem = "backtest_h" + std::to_string(res.horizon);
        const std::string series_path = out_path(common, stem + "_series.csv");
        write_text_file(series_path, write_series_csv(res));
        note_written(series_path);

        const std::string vars_path = out_path(common, stem + "_variables.csv");
        write_text_file(vars_path, write_forecast_variables_csv(report, res));
        note_written(vars_path);

        const std::string svg = render_forecast_svg(
            res.dates, res.actual, res.forecast,
            std::to_string(res.horizon) + "-day-ahead forecast vs actual");
        const std::string svg_path = out_path(common, stem + ".svg");
        write_text_file(svg_path, svg);
        note_written(svg_path);
    }
    return 0;
}

// ---- importance ----

struct ImportanceArgs {
    std::string matrix;
    std::size_t trees = 100;
    std::size_t max_depth = 8;
    std::size_t min_leaf = 2;
};

int run_importance(const ImportanceArgs& args, const CommonOptions& common) {
    const FeatureMatrix fm = load_feature_matrix_csv(args.matrix);
    if (fm.col_count() < 2)
        throw DataError("importance needs at least one indicator column plus the target");
    const std::size_t target = fm.target_column();
    Matrix features(fm.row_count(), fm.col_count() - 1);
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < fm.col_count() - 1; ++j) {
        labels.push_back(fm.labels[j]);
        for (std::size_t i = 0; i < fm.row_count(); ++i) features(i, j) = fm.values(i, j);
    }
    RfConfig config;
    config.n_trees = args.trees;
    config.max_depth = args.max_depth;
    config.min_leaf = args.min_leaf;
    config.seed = common.seed;
    const RandomForestModel model =
        fit_random_forest(features, fm.values.column(target), config, labels);
    if (!model.any_split)
        std::cerr << "note: no split improved any tree; importances are all zero\n";

    const std::string path = out_path(common, "importance.csv");
    write_text_file(path, write_importance_csv(model));
    note_written(path);
    return 0;
}

// ---- simulate ----

struct SimulateArgs {
    std::size_t t = 1000;
    double noise_sd = 35.0;
    bool plant = false;
};

SyntheticSpec demo_plant_spec(std::size_t t, double noise_sd, std::uint64_t seed) {
    // Four persistent maintenance/weather drivers feeding a generation
    // level around 4800 kWh/day; drivers are thresholded to {0,1} after
    // simulation. Spectral radius 0.65.
    SyntheticSpec spec;
    spec.k = 5;
    spec.p = 1;
    spec.t = t;
    spec.seed = seed;
    spec.labels = {"Grid Failure", "Inverter Failure", "Module Cleaning", "Cloudy",
                   std::string(kTargetLabel)};
    spec.alpha = {0.0, 0.0, 0.0, 0.0, 2160.0};
    Matrix b(5, 5);
    for (std::size_t j = 0; j < 4; ++j) b(j, j) = 0.65;
    b(4, 0) = -60.0;
    b(4, 1) = -45.0;
    b(4, 2) = 40.0;
    b(4, 3) = -35.0;
    b(4, 4) = 0.55;
    spec.beta = {b};
    spec.innovation_cov = SyntheticSpec::diagonal_cov({1.0, 1.0, 1.0, 1.0, noise_sd});
    for (std::size_t j = 0; j < 4; ++j) spec.binary_columns.push_back({j, 1.0});
    return spec;
}

PlantDataset plant_from_matrix(const FeatureMatrix& fm) {
    // Issue text uses the canonical phrase per indicator so featurizing
    // the written file reproduces the indicator columns exactly.
    const std::array<std::string, 4> phrases = {"Grid failure", "Inverter failure",
                                                "Module cleaning done", "Cloudy day"};
    const std::array<double, 5> shares = {0.247, 0.243, 0.251, 0.246, 0.013};
    PlantDataset ds;
    double meter = 1500000.0;
    for (std::size_t i = 0; i < fm.row_count(); ++i) {
        DailyRecord rec;
        rec.date = fm.dates[i];
        const double total = fm.values(i, 4);
        for (std::size_t a = 0; a < 5; ++a) rec.array_kwh[a] = shares[a] * total;
        rec.total_kwh = total;
        meter += total;
        rec.aggregate_meter_kwh = meter;
        rec.seeds_kwh = 0.99 * total;
        rec.difference_kwh = total - *rec.seeds_kwh;
        rec.insolation = 4.2 + 0.0003 * total - 0.8 * fm.values(i, 3);
        rec.pr_pct = 77.0 + 2.0 * fm.values(i, 2) - 3.0 * fm.values(i, 3);
        std::string text;
        for (std::size_t j = 0; j < 4; ++j) {
            if (fm.values(i, j) == 0.0) continue;
            if (!text.empty()) text += "; ";
            text += phrases[j];
        }
        rec.issues_text = std::move(text);
        ds.records.push_back(std::move(rec));
    }
    ds.provenance = {"simulated", ds.records.size()};
    return ds;
}

int run_simulate(const SimulateArgs& args, const CommonOptions& common) {
    const SyntheticSpec spec = demo_plant_spec(args.t, args.noise_sd, common.seed);
    const FeatureMatrix fm = simulate_var(spec);
    if (args.plant) {
        const PlantDataset ds = plant_from_matrix(fm);
        const std::string path = out_path(common, "simulated_plant.csv");
        write_text_file(path, serialize_dataset(ds, Schema::identity()));
        note_written(path);
    } else {
        const std::string path = out_path(common, "simulated_matrix.csv");
        write_text_file(path, write_feature_matrix_csv(fm));
        note_written(path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"maintenance-aware solar generation forecasting"};
    app.require_subcommand(1);
    app.set_config("--config");
    // Global options (--seed, --out-dir) may appear after the subcommand.
    app.fallthrough();

    CommonOptions common;
    app.add_option("--out-dir", common.out_dir, "directory for output files")
        ->capture_default_str();
    app.add_option("--seed", common.seed, "seed for every random draw")
        ->envname("MAINTVAR_SEED")
        ->capture_default_str();

    ValidateArgs validate_args;
    auto* cmd_validate = app.add_subcommand("validate", "parse a plant log and report violations");
    cmd_validate->add_option("--input", validate_args.input, "plant log CSV")
        ->required();
    cmd_validate->add_option("--schema", validate_args.schema,
                             "schema file (defaults to logical column names)");

    FeaturizeArgs featurize_args;
    auto* cmd_featurize =
        app.add_subcommand("featurize", "extract indicator columns from the issues text");
    cmd_featurize->add_option("--input", featurize_args.input, "plant log CSV")->required();
    cmd_featurize->add_option("--schema", featurize_args.schema, "schema file");
    cmd_featurize->add_option("--lexicon", featurize_args.lexicon, "lexicon file")->required();
    cmd_featurize
        ->add_option("--impute", featurize_args.impute, "gap policy: linear|forward_fill|drop")
        ->check(CLI::IsMember({"linear", "forward_fill", "drop"}))
        ->capture_default_str();
    cmd_featurize->add_flag("--scaled", featurize_args.scaled,
                            "replace indicator ones with occurrence percentages");

    ScreenArgs screen_args;
    auto* cmd_screen =
        app.add_subcommand("screen", "correlation/causality screening of indicators");
    cmd_screen->add_option("--matrix", screen_args.matrix, "feature matrix CSV")->required();
    cmd_screen->add_option("--target", screen_args.target, "target column label")
        ->capture_default_str();
    cmd_screen->add_option("--corr-threshold", screen_args.corr_threshold,
                           "absolute Pearson correlation threshold")
        ->capture_default_str();
    cmd_screen->add_option("--alpha", screen_args.alpha, "Granger significance level")
        ->capture_default_str();
    cmd_screen->add_option("--max-lag", screen_args.max_lag, "largest Granger lag tested")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    ForecastArgs forecast_args;
    auto* cmd_forecast = app.add_subcommand("forecast", "fit a VAR and forecast h days ahead");
    cmd_forecast->add_option("--matrix", forecast_args.matrix, "feature matrix CSV")->required();
    cmd_forecast->add_option("--horizon", forecast_args.horizon, "steps ahead")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd_forecast->add_option("--p-max", forecast_args.p_max, "largest lag order for AIC search")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_forecast->add_option("--p", forecast_args.fixed_p, "fixed lag order (skips AIC search)")
        ->check(CLI::PositiveNumber);

    BacktestArgs backtest_args;
    auto* cmd_backtest =
        app.add_subcommand("backtest", "hold-out-tail evaluation across horizons");
    cmd_backtest->add_option("--matrix", backtest_args.matrix, "feature matrix CSV")->required();
    cmd_backtest
        ->add_option("--horizons", backtest_args.horizons, "comma-separated forecast horizons")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_backtest->add_option("--p-max", backtest_args.p_max, "largest lag order for AIC search")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    ImportanceArgs importance_args;
    auto* cmd_importance =
        app.add_subcommand("importance", "random-forest impact of indicators on the target");
    cmd_importance->add_option("--matrix", importance_args.matrix, "feature matrix CSV")
        ->required();
    cmd_importance->add_option("--trees", importance_args.trees, "number of trees")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_importance->add_option("--max-depth", importance_args.max_depth, "maximum tree depth")
        ->capture_default_str();
    cmd_importance->add_option("--min-leaf", importance_args.min_leaf, "minimum samples per leaf")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    SimulateArgs simulate_args;
    auto* cmd_simulate =
        app.add_subcommand("simulate", "generate a seeded synthetic plant dataset");
    cmd_simulate->add_option("--t", simulate_args.t, "number of days")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_simulate->add_option("--noise-sd", simulate_args.noise_sd,
                             "innovation sd of the generation series")
        ->capture_default_str();
    cmd_simulate->add_flag("--plant", simulate_args.plant,
                           "emit a 13-column plant log instead of a feature matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*cmd_validate) return run_validate(validate_args, common);
        if (*cmd_featurize) return run_featurize(featurize_args, common);
        if (*cmd_screen) return run_screen(screen_args, common);
        if (*cmd_forecast) return run_forecast(forecast_args, common);
        if (*cmd_backtest) return run_backtest(backtest_args, common);
        if (*cmd_importance) return run_importance(importance_args, common);
        if (*cmd_simulate) return run_simulate(simulate_args, common);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
