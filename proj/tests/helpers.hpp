#pragma once

// Shared fixtures for the unit suites: random networks and datasets, an
// independent forward-pass oracle, temp directories, and a subprocess runner
// for CLI tests.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "tna/data.hpp"
#include "tna/nn.hpp"
#include "tna/rng.hpp"

namespace testhelp {

inline tna::NetworkSpec make_spec(std::vector<std::size_t> widths,
                                  tna::OutputHead head = tna::OutputHead::linear,
                                  std::uint64_t seed = 1) {
    tna::NetworkSpec spec;
    spec.layer_widths = std::move(widths);
    spec.output_head = head;
    spec.init_seed = seed;
    return spec;
}

inline tna::ParamVector random_params(std::size_t d, std::uint64_t seed, double scale = 0.5) {
    tna::Rng rng(seed);
    tna::ParamVector p(d);
    for (double& v : p) v = scale * rng.normal();
    return p;
}

inline tna::Dataset random_regression(std::size_t n, std::size_t in, std::size_t out,
                                      std::uint64_t seed) {
    tna::Rng rng(seed);
    tna::Dataset ds;
    ds.inputs.resize(n, in);
    ds.targets.resize(n, out);
    for (double& v : ds.inputs.data) v = rng.uniform(-1.0, 1.0);
    for (double& v : ds.targets.data) v = rng.uniform(-1.0, 1.0);
    return ds;
}

inline tna::Dataset random_classification(std::size_t n, std::size_t in, std::size_t classes,
                                          std::uint64_t seed) {
    tna::Rng rng(seed);
    tna::Dataset ds;
    ds.inputs.resize(n, in);
    ds.labels.resize(n);
    for (double& v : ds.inputs.data) v = rng.uniform(-1.0, 1.0);
    for (auto& y : ds.labels) y = static_cast<std::int32_t>(rng.below(std::uint32_t(classes)));
    return ds;
}

// Plain triple-loop forward pass, written independently of the library
// kernels: row-major weights, ReLU hidden layers, linear output.
inline std::vector<double> oracle_forward(const tna::LayeredNetwork& net,
                                          const double* x, std::size_t n_rows) {
    const auto& spec = net.spec();
    const std::size_t L = spec.depth();
    std::vector<double> cur(x, x + n_rows * spec.input_width());
    std::size_t width = spec.input_width();
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t rows = spec.layer_widths[l + 1];
        std::vector<double> next(n_rows * rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            for (std::size_t i = 0; i < rows; ++i) {
                double acc = net.bias(l)[i];
                for (std::size_t j = 0; j < width; ++j)
                    acc += net.weight(l)[i * width + j] * cur[r * width + j];
                if (l + 1 < L && acc < 0.0) acc = 0.0;
                next[r * rows + i] = acc;
            }
        }
        cur = std::move(next);
        width = rows;
    }
    return cur;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Fresh empty directory under the system temp root.
inline std::string temp_dir(const std::string& tag) {
    static int counter = 0;
    const std::string path = (std::filesystem::temp_directory_path() /
                              ("tna_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                               std::to_string(counter++)))
                                 .string();
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
    return path;
}

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

// Runs the tna binary with the given argument string.
inline CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(TNA_CLI_PATH) + " " + args + " 2>&1";
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, got);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
    return res;
}

// Strips leading '#' comment lines so CSV bodies from different configs can
// be compared without their provenance headers.
inline std::string csv_body(const std::string& text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        if (text[pos] != '#') out.append(text, pos, end - pos + 1);
        pos = end + 1;
    }
    return out;
}

inline std::string read_text_file(const std::string& path) {
    FILE* f = fopen(path.c_str(), "rb");
    if (!f) return "";
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, got);
    fclose(f);
    return out;
}

}  // namespace testhelp
