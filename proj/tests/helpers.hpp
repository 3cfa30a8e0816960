#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "maintvar/maintvar.hpp"

namespace testutil {

/// Fresh scratch directory per call; removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path() / "maintvar_tests";
        path_ = base / (std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the built CLI with the given argument string, capturing streams.
/// `env_prefix` is prepended verbatim, e.g. "MAINTVAR_SEED=7 ".
inline CliResult run_cli(const std::string& args, const TempDir& dir,
                         const std::string& env_prefix = {}) {
    const std::string out_file = dir.file("cli_stdout.txt");
    const std::string err_file = dir.file("cli_stderr.txt");
    const std::string cmd = env_prefix + "'" + MAINTVAR_CLI_PATH + "' " + args + " >'" +
                            out_file + "' 2>'" + err_file + "'";
    const int status = std::system(cmd.c_str());
    CliResult res;
    if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
    res.out = read_file(out_file);
    res.err = read_file(err_file);
    return res;
}

/// Reference h-step forecaster: rebuilds the whole lag window from
/// scratch every step, accumulating terms in the same lag-major order as
/// the library. Intentionally naive so it stays an independent check of
/// the rolling-buffer implementation.
inline maintvar::Matrix naive_forecast(const maintvar::VarModel& model,
                                       const maintvar::Matrix& history, std::size_t h) {
    const std::size_t k = model.k();
    std::vector<std::vector<double>> path;
    for (std::size_t r = 0; r < history.rows(); ++r) {
        std::vector<double> row(k);
        for (std::size_t j = 0; j < k; ++j) row[j] = history(r, j);
        path.push_back(row);
    }
    maintvar::Matrix out(h, k);
    for (std::size_t step = 0; step < h; ++step) {
        std::vector<double> next(k);
        for (std::size_t i = 0; i < k; ++i) {
            double v = model.alpha[i];
            for (std::size_t l = 1; l <= model.p; ++l)
                for (std::size_t j = 0; j < k; ++j)
                    v += model.beta[l - 1](i, j) * path[path.size() - l][j];
            next[i] = v;
        }
        for (std::size_t j = 0; j < k; ++j) out(step, j) = next[j];
        path.push_back(next);
    }
    return out;
}

/// Seeded Gaussian white noise, independent of the library's simulator.
inline std::vector<double> white_noise(std::uint64_t seed, std::size_t n, double sd = 1.0) {
    maintvar::CounterRng rng = maintvar::CounterRng::derive(seed, 0xABCDEF);
    std::vector<double> out(n);
    for (double& v : out) v = sd * rng.next_gaussian();
    return out;
}

inline std::vector<double> random_walk(std::uint64_t seed, std::size_t n, double sd = 1.0) {
    std::vector<double> out = white_noise(seed, n, sd);
    for (std::size_t i = 1; i < n; ++i) out[i] += out[i - 1];
    return out;
}

}  // namespace testutil
