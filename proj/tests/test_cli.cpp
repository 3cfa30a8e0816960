#include <catch2/catch.hpp>

#include <filesystem>
#include <set>

#include "helpers.hpp"
#include "maintvar/maintvar.hpp"

using namespace maintvar;
using testutil::CliResult;
using testutil::TempDir;
using testutil::run_cli;

namespace {

const std::string kDataDir = MAINTVAR_DATA_DIR;
const std::string kTestDataDir = MAINTVAR_TEST_DATA_DIR;

std::string q(const std::string& s) { return "'" + s + "'"; }

/// Writes a minimal identity-schema plant CSV with the given issue texts.
std::string write_plant_csv(const TempDir& dir, const std::vector<std::string>& issues,
                            const char* name = "plant.csv") {
    PlantDataset ds;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        DailyRecord rec;
        rec.date = Date{Date::from_ymd(2016, 1, 1).serial + static_cast<std::int32_t>(i)};
        for (std::size_t f = 0; f < kNumericFieldCount; ++f)
            rec.numeric(f) = 100.0 + static_cast<double>(i);
        rec.pr_pct = 78.0;
        rec.issues_text = issues[i];
        ds.records.push_back(rec);
    }
    const std::string path = dir.file(name);
    write_text_file(path, serialize_dataset(ds, Schema::identity()));
    return path;
}

}  // namespace

TEST_CASE("cli validate reports and exits zero on a clean file") {
    TempDir dir;
    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " validate --input " +
                                 q(kDataDir + "/sample_plant.csv") + " --schema " +
                                 q(kDataDir + "/schema.conf"),
                             dir);
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("out") + "/validation_report.csv"));
    CHECK(res.out.find("30 records") != std::string::npos);
}

TEST_CASE("cli featurize reproduces the golden corpus label sets") {
    TempDir dir;
    const auto corpus = csv::read_file(kTestDataDir + "/golden_corpus.csv");
    std::vector<std::string> issues;
    std::vector<std::set<std::string>> expected;
    for (std::size_t r = 1; r < corpus.size(); ++r) {
        issues.push_back(corpus[r][0]);
        std::set<std::string> labels;
        std::string_view rest = corpus[r][1];
        while (!rest.empty()) {
            const auto semi = rest.find(';');
            const auto label = trim(rest.substr(0, semi));
            if (!label.empty()) labels.insert(std::string(label));
            if (semi == std::string_view::npos) break;
            rest = rest.substr(semi + 1);
        }
        expected.push_back(std::move(labels));
    }
    const std::string plant = write_plant_csv(dir, issues);

    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " featurize --input " +
                                 q(plant) + " --lexicon " + q(kDataDir + "/lexicon.conf"),
                             dir);
    REQUIRE(res.exit_code == 0);

    const auto log = csv::read_file(dir.file("out") + "/extraction_log.csv");
    REQUIRE(log.size() == issues.size() + 1);
    for (std::size_t r = 1; r < log.size(); ++r) {
        std::set<std::string> got;
        std::string_view rest = log[r][1];
        while (!rest.empty()) {
            const auto semi = rest.find(';');
            const auto label = trim(rest.substr(0, semi));
            if (!label.empty()) got.insert(std::string(label));
            if (semi == std::string_view::npos) break;
            rest = rest.substr(semi + 1);
        }
        INFO("corpus line " << r << ": \"" << issues[r - 1] << "\"");
        CHECK(got == expected[r - 1]);
    }

    // The matrix has date + 12 indicators + target and one row per day.
    const FeatureMatrix fm = load_feature_matrix_csv(dir.file("out") + "/feature_matrix.csv");
    CHECK(fm.col_count() == 13);
    CHECK(fm.row_count() == issues.size());
}

TEST_CASE("cli featurize with empty issue texts yields zero indicators") {
    TempDir dir;
    const std::string plant = write_plant_csv(dir, std::vector<std::string>(40, ""));
    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " featurize --input " +
                                 q(plant) + " --lexicon " + q(kDataDir + "/lexicon.conf"),
                             dir);
    REQUIRE(res.exit_code == 0);
    const FeatureMatrix fm = load_feature_matrix_csv(dir.file("out") + "/feature_matrix.csv");
    for (std::size_t i = 0; i < fm.row_count(); ++i)
        for (std::size_t j = 0; j + 1 < fm.col_count(); ++j) CHECK(fm.values(i, j) == 0.0);
}

TEST_CASE("cli featurize --scaled writes occurrence percentages") {
    TempDir dir;
    // Grid failure on 2 of 8 days -> scaled cells read 25.
    std::vector<std::string> issues(8, "");
    issues[1] = "grid failure";
    issues[5] = "grid failure";
    const std::string plant = write_plant_csv(dir, issues);
    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " featurize --input " +
                                 q(plant) + " --lexicon " + q(kDataDir + "/lexicon.conf") +
                                 " --scaled",
                             dir);
    REQUIRE(res.exit_code == 0);
    const FeatureMatrix fm = load_feature_matrix_csv(dir.file("out") + "/feature_matrix.csv");
    const auto col = fm.column_of("Grid Failure");
    REQUIRE(col.has_value());
    CHECK(fm.values(1, *col) == 25.0);
    CHECK(fm.values(5, *col) == 25.0);
    CHECK(fm.values(0, *col) == 0.0);
}

TEST_CASE("cli featurize names a missing lexicon path") {
    TempDir dir;
    const std::string plant = write_plant_csv(dir, {"", "", ""});
    const std::string missing = dir.file("nope.conf");
    const auto res = run_cli("featurize --input " + q(plant) + " --lexicon " + q(missing), dir);
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("nope.conf") != std::string::npos);
}

TEST_CASE("cli screen flags planted features and writes a selected matrix") {
    TempDir dir;
    // Simulated plant data: four real drivers plus the target.
    auto sim = run_cli("--out-dir " + q(dir.file("sim")) + " --seed 3 simulate --t 500", dir);
    REQUIRE(sim.exit_code == 0);
    const std::string matrix = dir.file("sim") + "/simulated_matrix.csv";

    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " screen --matrix " + q(matrix),
                             dir);
    REQUIRE(res.exit_code == 0);
    const auto report = csv::read_file(dir.file("out") + "/screening_report.csv");
    REQUIRE(report.size() == 6);  // header + 5 columns
    // Every driver is wired into the target, so everything is selected.
    for (std::size_t r = 1; r < report.size(); ++r) CHECK(report[r][4] == "1");

    const FeatureMatrix selected =
        load_feature_matrix_csv(dir.file("out") + "/selected_matrix.csv");
    CHECK(selected.labels.back() == std::string(kTargetLabel));
    CHECK(selected.col_count() == 5);
}

TEST_CASE("cli screen handles a constant indicator column") {
    TempDir dir;
    FeatureMatrix fm;
    fm.labels = {"stuck", std::string(kTargetLabel)};
    fm.values = Matrix(60, 2);
    CounterRng rng(5);
    for (std::size_t i = 0; i < 60; ++i) {
        fm.dates.push_back(Date{static_cast<std::int32_t>(17000 + i)});
        fm.values(i, 0) = 1.0;
        fm.values(i, 1) = 100.0 + rng.next_gaussian();
    }
    const std::string matrix = dir.file("matrix.csv");
    write_text_file(matrix, write_feature_matrix_csv(fm));

    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " screen --matrix " + q(matrix),
                             dir);
    REQUIRE(res.exit_code == 0);
    const auto report = csv::read_file(dir.file("out") + "/screening_report.csv");
    REQUIRE(report.size() == 3);
    CHECK(report[1][0] == "stuck");
    CHECK(report[1][1].empty());   // undefined correlation
    CHECK(report[1][4] == "0");    // never selected
    const FeatureMatrix selected =
        load_feature_matrix_csv(dir.file("out") + "/selected_matrix.csv");
    CHECK(selected.col_count() == 1);
}

TEST_CASE("cli screen on a target-only matrix reports just the target") {
    TempDir dir;
    FeatureMatrix fm;
    fm.labels = {std::string(kTargetLabel)};
    fm.values = Matrix(50, 1);
    CounterRng rng(8);
    for (std::size_t i = 0; i < 50; ++i) {
        fm.dates.push_back(Date{static_cast<std::int32_t>(17000 + i)});
        fm.values(i, 0) = 1000.0 + rng.next_gaussian();
    }
    const std::string matrix = dir.file("matrix.csv");
    write_text_file(matrix, write_feature_matrix_csv(fm));
    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " screen --matrix " + q(matrix),
                             dir);
    REQUIRE(res.exit_code == 0);
    const auto report = csv::read_file(dir.file("out") + "/screening_report.csv");
    REQUIRE(report.size() == 2);
    CHECK(report[1][0] == std::string(kTargetLabel));
    const FeatureMatrix selected =
        load_feature_matrix_csv(dir.file("out") + "/selected_matrix.csv");
    CHECK(selected.col_count() == 1);
}

TEST_CASE("cli seed falls back to the environment variable") {
    TempDir dir;
    auto via_env = run_cli("--out-dir " + q(dir.file("env")) + " simulate --t 260", dir,
                           "MAINTVAR_SEED=77 ");
    REQUIRE(via_env.exit_code == 0);
    auto via_flag = run_cli("--out-dir " + q(dir.file("flag")) + " --seed 77 simulate --t 260",
                            dir);
    REQUIRE(via_flag.exit_code == 0);
    auto other = run_cli("--out-dir " + q(dir.file("other")) + " --seed 78 simulate --t 260",
                         dir);
    REQUIRE(other.exit_code == 0);
    const auto env_bytes = testutil::read_file(dir.file("env") + "/simulated_matrix.csv");
    CHECK(env_bytes == testutil::read_file(dir.file("flag") + "/simulated_matrix.csv"));
    CHECK(env_bytes != testutil::read_file(dir.file("other") + "/simulated_matrix.csv"));
    // An explicit flag wins over the environment.
    auto flag_wins = run_cli("--out-dir " + q(dir.file("fw")) + " --seed 78 simulate --t 260",
                             dir, "MAINTVAR_SEED=77 ");
    REQUIRE(flag_wins.exit_code == 0);
    CHECK(testutil::read_file(dir.file("fw") + "/simulated_matrix.csv") ==
          testutil::read_file(dir.file("other") + "/simulated_matrix.csv"));
}

TEST_CASE("cli forecast writes h rows for all variables plus a model file") {
    TempDir dir;
    auto sim = run_cli("--out-dir " + q(dir.file("sim")) + " --seed 4 simulate --t 300", dir);
    REQUIRE(sim.exit_code == 0);
    const std::string matrix = dir.file("sim") + "/simulated_matrix.csv";

    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " forecast --matrix " +
                                 q(matrix) + " --horizon 3 --p-max 3",
                             dir);
    REQUIRE(res.exit_code == 0);
    const auto fc = csv::read_file(dir.file("out") + "/forecast.csv");
    REQUIRE(fc.size() == 4);  // header + 3 steps
    CHECK(fc[0].size() == 6); // date + 5 variables
    // Forecast dates continue the input calendar: row 300 of a daily
    // series starting 2012-01-01 lands on 2012-10-26.
    CHECK(fc[1][0] == "2012-10-27");

    const VarModel model =
        deserialize_var_model(testutil::read_file(dir.file("out") + "/model.txt"));
    CHECK(model.k() == 5);
}

TEST_CASE("cli forecast rejects a zero horizon as usage") {
    TempDir dir;
    const auto res = run_cli("forecast --matrix x.csv --horizon 0", dir);
    CHECK(res.exit_code == 1);
}

TEST_CASE("cli forecast warns about an unstable fit but still writes output") {
    TempDir dir;
    // Explosive bivariate system; the fit recovers a spectral radius > 1.
    FeatureMatrix fm;
    fm.labels = {"a", std::string(kTargetLabel)};
    fm.values = Matrix(60, 2);
    CounterRng rng(6);
    double x = 1.0, y = -1.0;
    for (std::size_t i = 0; i < 60; ++i) {
        fm.dates.push_back(Date{static_cast<std::int32_t>(17000 + i)});
        x = 1.05 * x + 0.01 * rng.next_gaussian();
        y = 1.02 * y + 0.01 * rng.next_gaussian();
        fm.values(i, 0) = x;
        fm.values(i, 1) = y;
    }
    const std::string matrix = dir.file("matrix.csv");
    write_text_file(matrix, write_feature_matrix_csv(fm));

    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " forecast --matrix " +
                                 q(matrix) + " --horizon 5 --p 1",
                             dir);
    CHECK(res.exit_code == 0);
    CHECK(res.err.find("unstable") != std::string::npos);
    CHECK(std::filesystem::exists(dir.file("out") + "/forecast.csv"));
}

TEST_CASE("cli backtest emits a table, series, and plots per horizon") {
    TempDir dir;
    auto sim = run_cli("--out-dir " + q(dir.file("sim")) + " --seed 7 simulate --t 400", dir);
    REQUIRE(sim.exit_code == 0);
    const std::string matrix = dir.file("sim") + "/simulated_matrix.csv";

    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " backtest --matrix " +
                                 q(matrix) + " --p-max 3",
                             dir);
    REQUIRE(res.exit_code == 0);
    const auto table = csv::read_file(dir.file("out") + "/backtest_table.csv");
    REQUIRE(table.size() == 7);  // header + default six horizons
    CHECK(table[0] == std::vector<std::string>{"Days", "RMSPE", "RMSE", "MAE"});
    for (std::size_t h : kDefaultHorizons) {
        const std::string stem = dir.file("out") + "/backtest_h" + std::to_string(h);
        CHECK(std::filesystem::exists(stem + "_series.csv"));
        CHECK(std::filesystem::exists(stem + ".svg"));
        const auto vars = csv::read_file(stem + "_variables.csv");
        REQUIRE(vars.size() == h + 1);
        CHECK(vars[0].size() == 6);  // date + all five variables
    }

    const auto single = run_cli("--out-dir " + q(dir.file("one")) + " backtest --matrix " +
                                    q(matrix) + " --horizons 3 --p-max 3",
                                dir);
    REQUIRE(single.exit_code == 0);
    CHECK(csv::read_file(dir.file("one") + "/backtest_table.csv").size() == 2);
}

TEST_CASE("cli maps numeric failures to exit code three") {
    TempDir dir;
    // A constant column makes the VAR design rank-deficient.
    FeatureMatrix fm;
    fm.labels = {"stuck", std::string(kTargetLabel)};
    fm.values = Matrix(80, 2);
    CounterRng rng(12);
    for (std::size_t i = 0; i < 80; ++i) {
        fm.dates.push_back(Date{static_cast<std::int32_t>(17000 + i)});
        fm.values(i, 0) = 1.0;
        fm.values(i, 1) = 100.0 + rng.next_gaussian();
    }
    const std::string matrix = dir.file("matrix.csv");
    write_text_file(matrix, write_feature_matrix_csv(fm));
    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " forecast --matrix " +
                                 q(matrix) + " --horizon 3 --p 1",
                             dir);
    CHECK(res.exit_code == 3);
    CHECK(res.err.find("rank-deficient") != std::string::npos);
}

TEST_CASE("cli rejects a matrix containing non-finite cells") {
    TempDir dir;
    const std::string matrix = dir.file("matrix.csv");
    write_text_file(matrix,
                    "date,a,Total generation (KWH)\n"
                    "2016-01-01,1,100\n"
                    "2016-01-02,nan,101\n");
    const auto res = run_cli("screen --matrix " + q(matrix), dir);
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("bad numeric") != std::string::npos);
}

TEST_CASE("cli backtest reports insufficient rows as a data error") {
    TempDir dir;
    auto sim = run_cli("--out-dir " + q(dir.file("sim")) + " simulate --t 40", dir);
    REQUIRE(sim.exit_code == 0);
    const auto res = run_cli("backtest --matrix " + q(dir.file("sim") + "/simulated_matrix.csv"),
                             dir);
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("insufficient rows") != std::string::npos);
}

TEST_CASE("cli importance ranks the simulated drivers") {
    TempDir dir;
    auto sim = run_cli("--out-dir " + q(dir.file("sim")) + " --seed 9 simulate --t 400", dir);
    REQUIRE(sim.exit_code == 0);
    const auto res = run_cli("--out-dir " + q(dir.file("out")) + " --seed 9 importance --matrix " +
                                 q(dir.file("sim") + "/simulated_matrix.csv") + " --trees 60",
                             dir);
    REQUIRE(res.exit_code == 0);
    const auto ranked = csv::read_file(dir.file("out") + "/importance.csv");
    REQUIRE(ranked.size() == 5);  // header + 4 indicators
    CHECK(ranked[0] == std::vector<std::string>{"label", "importance"});
}

TEST_CASE("cli commands compose into a full pipeline") {
    TempDir dir;
    auto sim = run_cli("--out-dir " + q(dir.file("sim")) + " --seed 11 simulate --plant --t 400",
                       dir);
    REQUIRE(sim.exit_code == 0);
    const std::string plant = dir.file("sim") + "/simulated_plant.csv";

    auto feat = run_cli("--out-dir " + q(dir.file("feat")) + " featurize --input " + q(plant) +
                            " --lexicon " + q(kDataDir + "/lexicon.conf"),
                        dir);
    REQUIRE(feat.exit_code == 0);

    auto screen = run_cli("--out-dir " + q(dir.file("screen")) + " screen --matrix " +
                              q(dir.file("feat") + "/feature_matrix.csv"),
                          dir);
    REQUIRE(screen.exit_code == 0);

    const std::string selected = dir.file("screen") + "/selected_matrix.csv";
    auto bt = run_cli("--out-dir " + q(dir.file("bt")) + " backtest --matrix " + q(selected) +
                          " --horizons 3,7 --p-max 3",
                      dir);
    REQUIRE(bt.exit_code == 0);

    auto fc = run_cli("--out-dir " + q(dir.file("fc")) + " forecast --matrix " + q(selected) +
                          " --horizon 5 --p-max 3",
                      dir);
    REQUIRE(fc.exit_code == 0);

    // The screened matrix kept the four planted drivers plus the target.
    const FeatureMatrix sel = load_feature_matrix_csv(selected);
    CHECK(sel.col_count() == 5);
    const auto table = csv::read_file(dir.file("bt") + "/backtest_table.csv");
    REQUIRE(table.size() == 3);
}

TEST_CASE("cli runs are byte-identical for identical config and seed") {
    TempDir dir;
    for (const char* out : {"a", "b"}) {
        auto sim = run_cli("--out-dir " + q(dir.file(out)) + " --seed 21 simulate --plant --t 250",
                           dir);
        REQUIRE(sim.exit_code == 0);
        auto feat = run_cli("--out-dir " + q(dir.file(out)) + " featurize --input " +
                                q(dir.file(out) + "/simulated_plant.csv") + " --lexicon " +
                                q(kDataDir + "/lexicon.conf"),
                            dir);
        REQUIRE(feat.exit_code == 0);
        auto screen = run_cli("--out-dir " + q(dir.file(out)) + " screen --matrix " +
                                  q(dir.file(out) + "/feature_matrix.csv"),
                              dir);
        REQUIRE(screen.exit_code == 0);
        auto bt = run_cli("--out-dir " + q(dir.file(out)) + " backtest --matrix " +
                              q(dir.file(out) + "/selected_matrix.csv") +
                              " --horizons 3,5 --p-max 2",
                          dir);
        REQUIRE(bt.exit_code == 0);
    }
    for (const char* name :
         {"/simulated_plant.csv", "/feature_matrix.csv", "/extraction_log.csv",
          "/selected_matrix.csv", "/backtest_table.csv", "/backtest_h3_series.csv",
          "/backtest_h3.svg", "/backtest_h5.svg"}) {
        INFO(name);
        CHECK(testutil::read_file(dir.file("a") + name) ==
              testutil::read_file(dir.file("b") + name));
    }
}

TEST_CASE("cli config file supplies defaults that flags override") {
    TempDir dir;
    auto sim = run_cli("--out-dir " + q(dir.file("sim")) + " simulate --t 300", dir);
    REQUIRE(sim.exit_code == 0);

    const std::string config = dir.file("run.conf");
    write_text_file(config, "out-dir = \"" + dir.file("from_config") + "\"\n");
    auto res = run_cli("--config " + q(config) + " screen --matrix " +
                           q(dir.file("sim") + "/simulated_matrix.csv"),
                       dir);
    REQUIRE(res.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("from_config") + "/screening_report.csv"));

    // A flag on the command line beats the config value.
    auto res2 = run_cli("--config " + q(config) + " --out-dir " + q(dir.file("flag_wins")) +
                            " screen --matrix " + q(dir.file("sim") + "/simulated_matrix.csv"),
                        dir);
    REQUIRE(res2.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("flag_wins") + "/screening_report.csv"));
}

TEST_CASE("svg rendering is structurally sound and deterministic") {
    std::vector<Date> dates;
    for (int i = 0; i < 3; ++i) dates.push_back(Date{17000 + i});
    const std::vector<double> actual = {4500.0, 4700.0, 4600.0};
    const std::vector<double> forecast = {4550.0, 4650.0, 4580.0};
    const std::string svg = render_forecast_svg(dates, actual, forecast, "demo");
    std::size_t polylines = 0, at = 0;
    while ((at = svg.find("<polyline", at)) != std::string::npos) {
        ++polylines;
        ++at;
    }
    CHECK(polylines == 2);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("actual") != std::string::npos);
    CHECK(svg.find("forecast") != std::string::npos);
    CHECK(svg == render_forecast_svg(dates, actual, forecast, "demo"));

    CHECK_THROWS_AS(render_forecast_svg({}, {}, {}, "empty"), EmptySeries);
}
