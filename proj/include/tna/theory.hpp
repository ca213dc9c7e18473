#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tna/matrix.hpp"

namespace tna {

// Configuration of the masked two-layer pair v^T sigma(U x) of Theorem 3.1's
// setting: hidden width h, input dim d, inputs uniform in the b-ball,
// Gaussian entries with std sigma_v / sigma_U, mask (frozen) ratios rho_v /
// rho_U, failure probability delta.
struct TheoryConfig {
    std::size_t h = 512;
    std::size_t d = 32;
    double b = 1.0;
    double sigma_v = 0.05;
    double sigma_U = 0.05;
    double rho_v = 0.4;
    double rho_U = 0.4;
    double delta = 0.05;
    std::size_t n_x = 4096;
    std::size_t alpha_grid_size = 25;

    void validate() const;
};

// Two networks sharing the frozen entries (mask bit 0) exactly; free entries
// are independent Gaussians.
struct TwoLayerPair {
    Matrix U, U2;                      // h x d
    std::vector<double> v, v2;         // h
    std::vector<std::uint8_t> mask_U;  // h*d, 0 = frozen (shared)
    std::vector<std::uint8_t> mask_v;  // h
};

TwoLayerPair sample_pair(const TheoryConfig& cfg, std::uint64_t seed);

// Monte Carlo estimate of z(alpha) over the alpha grid with standard errors,
// central finite differences d1/d2 on interior points, the analytic first
// derivative from the proof's expression, and ReLU-kink flags (a grid point
// is flagged when any pre-activation magnitude falls below 1e-6).
struct ZProfile {
    std::vector<double> alphas;
    std::vector<double> zhat;
    std::vector<double> se;
    std::vector<double> d1_fd;       // NaN at endpoints
    std::vector<double> d2_fd;       // NaN at endpoints
    std::vector<double> d1_analytic;
    std::vector<std::uint8_t> kink;
    double max_abs_z = 0.0;
    double max_abs_d1 = 0.0;  // over interior finite differences
    double max_abs_d2 = 0.0;
};

std::vector<double> uniform_alpha_grid(std::size_t m);

ZProfile z_profile(const TwoLayerPair& pair, const TheoryConfig& cfg,
                   const std::vector<double>& alpha_grid, std::uint64_t x_seed);

// The three closed-form right-hand sides of Theorem 3.1 (natural log).
struct TheoremBounds {
    double b_z = 0.0;
    double b_d1 = 0.0;
    double b_d2 = 0.0;
};

TheoremBounds theorem_bounds(const TheoryConfig& cfg);

struct MonotonicityReport {
    std::vector<double> rho_values;
    std::vector<double> mean_max_z;  // mean over trials of max_alpha |zhat|
    double spearman = 0.0;           // rank correlation of mean_max_z vs rho
    int trials_per_rho = 0;
};

struct BoundCheckReport {
    TheoryConfig cfg;
    TheoremBounds bounds;
    std::vector<double> max_z, max_d1, max_d2;  // per trial
    double rate_z = 0.0, rate_d1 = 0.0, rate_d2 = 0.0;
    double rate_joint = 0.0;  // any of the three violated
    MonotonicityReport monotonicity;
    std::uint64_t base_seed = 0;
    int trials = 0;
};

// Per trial: sample a pair and a fresh input set, take the grid maxima of
// |zhat|, |d1|, |d2|, and compare against the bounds.  Also sweeps rho_U
// over {0, 0.25, 0.5, 0.75, 1} to report the monotone trend of max |zhat|.
BoundCheckReport bound_check(const TheoryConfig& cfg, int trials, std::uint64_t base_seed,
                             int mono_trials = 50);

std::string bound_check_to_json(const BoundCheckReport& report);

// Spearman rank correlation (average ranks on ties); exposed for tests.
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace tna
