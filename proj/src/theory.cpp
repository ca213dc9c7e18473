#include "tna/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "tna/errors.hpp"
#include "tna/kernels.hpp"
#include "tna/rng.hpp"

namespace tna {

void TheoryConfig::validate() const {
    if (h == 0 || d == 0) throw config_error("theory: h and d must be positive");
    if (!(b > 0.0)) throw config_error("theory: ball radius b must be positive");
    if (!(sigma_v > 0.0) || !(sigma_U > 0.0))
        throw config_error("theory: sigmas must be positive");
    if (!(rho_v >= 0.0 && rho_v <= 1.0) || !(rho_U >= 0.0 && rho_U <= 1.0))
        throw config_error("theory: mask ratios must be in [0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw config_error("theory: delta must be in (0,1)");
    if (n_x == 0) throw config_error("theory: n_x must be positive");
    if (alpha_grid_size < 3) throw config_error("theory: alpha grid needs at least 3 points");
}

namespace {
// Exact-count frozen positions: floor(rho * n) zeros chosen uniformly.
std::vector<std::uint8_t> exact_count_mask(std::size_t n, double rho, Rng& rng) {
    std::vector<std::uint8_t> bits(n, 1);
    const std::size_t zeros = static_cast<std::size_t>(std::floor(rho * static_cast<double>(n)));
    if (zeros > 0) {
        std::vector<std::uint32_t> chosen =
            rng.choose_k(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(zeros));
        for (std::uint32_t c : chosen) bits[c] = 0;
    }
    return bits;
}

// One fused pass over the hidden layer for one sample: lerp the
// pre-activations, relu, and accumulate the value and derivative terms.
// Endpoints and grid cells share this code path, so the alpha = 0, 1
// cancellations (and the rho = 1 control) are exact, not merely close.
struct RowTerms {
    double s = 0.0;     // w^T sigma(g) with g = lerp(p1, p2, alpha)
    double t2 = 0.0;    // w^T [sigma'(g) . (p1 - p2)]
    double dv = 0.0;    // (v - v2)^T sigma(g)
    bool kink = false;  // any |g_j| within 1e-6 of the relu kink
};

// noinline: endpoint and grid calls must run the same instructions, or the
// compiler specializes one site (constant alpha, aliased rows) with different
// FMA contraction and the exact cancellations decay to ~1e-20 residue.
__attribute__((noinline)) RowTerms row_terms(const double* p1, const double* p2, const double* w,
                                             const double* vdiff, double alpha, std::size_t h) {
    RowTerms r;
    for (std::size_t j = 0; j < h; ++j) {
        const double g = kern::lerp(p1[j], p2[j], alpha);
        // Branchless: the 0/1 gate multiplies exactly, and adding a literal
        // zero never changes a partial sum, so the values match the gated
        // formulation while the half-taken relu branch never mispredicts.
        const double on = g > 0.0 ? 1.0 : 0.0;
        const double sg = on * g;
        r.s += sg * w[j];
        r.t2 += on * (w[j] * (p1[j] - p2[j]));
        r.dv += vdiff[j] * sg;
        r.kink |= std::abs(g) < 1e-6;
    }
    return r;
}
}  // namespace

TwoLayerPair sample_pair(const TheoryConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    TwoLayerPair p;
    p.U.resize(cfg.h, cfg.d);
    p.U2.resize(cfg.h, cfg.d);
    p.v.resize(cfg.h);
    p.v2.resize(cfg.h);

    Rng rng(seed);
    for (double& x : p.U.data) x = rng.normal(0.0, cfg.sigma_U);
    for (double& x : p.v) x = rng.normal(0.0, cfg.sigma_v);
    p.mask_U = exact_count_mask(cfg.h * cfg.d, cfg.rho_U, rng);
    p.mask_v = exact_count_mask(cfg.h, cfg.rho_v, rng);
    for (std::size_t i = 0; i < p.U.data.size(); ++i)
        p.U2.data[i] = p.mask_U[i] ? rng.normal(0.0, cfg.sigma_U) : p.U.data[i];
    for (std::size_t i = 0; i < cfg.h; ++i)
        p.v2[i] = p.mask_v[i] ? rng.normal(0.0, cfg.sigma_v) : p.v[i];
    return p;
}

std::vector<double> uniform_alpha_grid(std::size_t m) {
    if (m < 2) throw config_error("alpha grid needs at least 2 points");
    std::vector<double> g(m);
    for (std::size_t i = 0; i < m; ++i)
        g[i] = static_cast<double>(i) / static_cast<double>(m - 1);
    g.front() = 0.0;
    g.back() = 1.0;
    return g;
}

ZProfile z_profile(const TwoLayerPair& pair, const TheoryConfig& cfg,
                   const std::vector<double>& alpha_grid, std::uint64_t x_seed) {
    cfg.validate();
    const std::size_t h = cfg.h;
    const std::size_t d = cfg.d;
    const std::size_t m = alpha_grid.size();
    const std::size_t n = cfg.n_x;
    if (m < 3) throw config_error("z_profile: alpha grid needs at least 3 points");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(alpha_grid[i] >= 0.0 && alpha_grid[i] <= 1.0))
            throw config_error("z_profile: alpha grid outside [0,1]");
        if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1]))
            throw config_error("z_profile: alpha grid must be strictly increasing");
    }
    if (pair.U.rows != h || pair.U.cols != d) throw config_error("z_profile: pair/config mismatch");

    // Input samples, drawn sequentially for determinism.
    Matrix X(n, d);
    Rng rng(x_seed);
    for (std::size_t i = 0; i < n; ++i) rng.ball(cfg.b, d, X.row(i));

    // Pre-activations P = X U^T and P2 = X U2^T; the interpolated
    // pre-activation is their per-entry lerp because g depends linearly on U.
    Matrix P(n, h), P2(n, h);
    kern::affine_nt(X.data.data(), n, d, pair.U.data.data(), h, nullptr, P.data.data());
    kern::affine_nt(X.data.data(), n, d, pair.U2.data.data(), h, nullptr, P2.data.data());

    // Endpoint values a = v^T sigma(Ux), a2 = v2^T sigma(U2 x), computed
    // through the same row_terms pass used along the grid so the alpha = 0, 1
    // cancellations are exact per sample.
    std::vector<double> a(n), a2(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = row_terms(P.row(i), P.row(i), pair.v.data(), pair.v.data(), 1.0, h).s;
        a2[i] = row_terms(P2.row(i), P2.row(i), pair.v2.data(), pair.v2.data(), 0.0, h).s;
    }

    ZProfile out;
    out.alphas = alpha_grid;
    out.zhat.assign(m, 0.0);
    out.se.assign(m, 0.0);
    out.d1_analytic.assign(m, 0.0);
    out.kink.assign(m, 0);

    std::vector<double> vdiff(h);
    for (std::size_t j = 0; j < h; ++j) vdiff[j] = pair.v[j] - pair.v2[j];
    Matrix W(m, h);
    for (std::size_t k = 0; k < m; ++k)
        kern::lerp_vec(pair.v.data(), pair.v2.data(), alpha_grid[k], W.row(k), h);

    struct Acc {
        double mean = 0.0, m2 = 0.0, d1 = 0.0;
        bool kink = false;
    };
    std::vector<Acc> acc(m);

    // Row blocks keep the pre-activations cache-hot while every alpha visits
    // them.  Each alpha's accumulator still sees samples in ascending order,
    // so the result is bit-identical for any block size or thread count.
    constexpr std::size_t block = 32;
    for (std::size_t i0 = 0; i0 < n; i0 += block) {
        const std::size_t i1 = std::min(n, i0 + block);
#pragma omp parallel for schedule(static)
        for (std::size_t k = 0; k < m; ++k) {
            Acc a_k = acc[k];
            const double alpha = alpha_grid[k];
            const double* wk = W.row(k);
            for (std::size_t i = i0; i < i1; ++i) {
                const RowTerms r = row_terms(P.row(i), P2.row(i), wk, vdiff.data(), alpha, h);
                const double z = r.s - kern::lerp(a[i], a2[i], alpha);

                // Welford accumulation, fixed sample order.
                const double delta = z - a_k.mean;
                a_k.mean += delta / static_cast<double>(i + 1);
                a_k.m2 += delta * (z - a_k.mean);

                // Analytic first derivative: (v - v2)^T sigma(g)
                //   + w^T [sigma'(g) . ((U - U2)x)] - a + a2,
                // with (U - U2)x = p1 - p2 by linearity.
                a_k.d1 += r.dv + r.t2 - a[i] + a2[i];
                a_k.kink |= r.kink;
            }
            acc[k] = a_k;
        }
    }
    for (std::size_t k = 0; k < m; ++k) {
        out.zhat[k] = acc[k].mean;
        out.se[k] = n > 1 ? std::sqrt(acc[k].m2 / static_cast<double>(n - 1) /
                                      static_cast<double>(n))
                          : 0.0;
        out.d1_analytic[k] = acc[k].d1 / static_cast<double>(n);
        out.kink[k] = acc[k].kink ? 1 : 0;
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.d1_fd.assign(m, nan);
    out.d2_fd.assign(m, nan);
    for (std::size_t k = 1; k + 1 < m; ++k) {
        const double h1 = alpha_grid[k] - alpha_grid[k - 1];
        const double h2 = alpha_grid[k + 1] - alpha_grid[k];
        out.d1_fd[k] = (out.zhat[k + 1] - out.zhat[k - 1]) / (h1 + h2);
        out.d2_fd[k] = 2.0 * (out.zhat[k - 1] / (h1 * (h1 + h2)) - out.zhat[k] / (h1 * h2) +
                              out.zhat[k + 1] / (h2 * (h1 + h2)));
    }

    out.max_abs_z = 0.0;
    for (double z : out.zhat) out.max_abs_z = std::max(out.max_abs_z, std::abs(z));
    out.max_abs_d1 = 0.0;
    out.max_abs_d2 = 0.0;
    for (std::size_t k = 1; k + 1 < m; ++k) {
        out.max_abs_d1 = std::max(out.max_abs_d1, std::abs(out.d1_fd[k]));
        out.max_abs_d2 = std::max(out.max_abs_d2, std::abs(out.d2_fd[k]));
    }
    return out;
}

TheoremBounds theorem_bounds(const TheoryConfig& cfg) {
    cfg.validate();
    const double h = static_cast<double>(cfg.h);
    const double base = cfg.b * cfg.sigma_v * cfg.sigma_U * std::sqrt(h);
    TheoremBounds out;
    out.b_z = std::sqrt(2.0) * base * std::log(8.0 * h / cfg.delta) * std::sqrt(1.0 - cfg.rho_U);
    out.b_d1 = 4.0 * std::sqrt(2.0) * base * std::log(24.0 * h / cfg.delta) *
               (std::sqrt(1.0 - cfg.rho_v) + std::sqrt(1.0 - cfg.rho_U));
    out.b_d2 = 8.0 * base * std::log(4.0 * h / cfg.delta) *
               std::sqrt(1.0 - std::max(cfg.rho_U, cfg.rho_v));
    return out;
}

double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw config_error("spearman: need two equal-length series of size >= 2");
    auto ranks = [](const std::vector<double>& x) {
        const std::size_t n = x.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&x](std::size_t i, std::size_t j) { return x[i] < x[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank, 1-based
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a);
    const std::vector<double> rb = ranks(b);
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

BoundCheckReport bound_check(const TheoryConfig& cfg, int trials, std::uint64_t base_seed,
                             int mono_trials) {
    cfg.validate();
    if (trials < 50) throw config_error("bound_check: trials must be >= 50");
    if (mono_trials < 1) throw config_error("bound_check: mono_trials must be >= 1");

    BoundCheckReport report;
    report.cfg = cfg;
    report.bounds = theorem_bounds(cfg);
    report.base_seed = base_seed;
    report.trials = trials;
    report.max_z.resize(trials);
    report.max_d1.resize(trials);
    report.max_d2.resize(trials);

    const std::vector<double> grid = uniform_alpha_grid(cfg.alpha_grid_size);
    for (int k = 0; k < trials; ++k) {
        const TwoLayerPair pair =
            sample_pair(cfg, derive_seed(base_seed, static_cast<std::uint64_t>(k), 0));
        const ZProfile prof =
            z_profile(pair, cfg, grid, derive_seed(base_seed, static_cast<std::uint64_t>(k), 1));
        report.max_z[k] = prof.max_abs_z;
        report.max_d1[k] = prof.max_abs_d1;
        report.max_d2[k] = prof.max_abs_d2;
    }
    int nz = 0, nd1 = 0, nd2 = 0, njoint = 0;
    for (int k = 0; k < trials; ++k) {
        const bool vz = report.max_z[k] > report.bounds.b_z;
        const bool vd1 = report.max_d1[k] > report.bounds.b_d1;
        const bool vd2 = report.max_d2[k] > report.bounds.b_d2;
        nz += vz;
        nd1 += vd1;
        nd2 += vd2;
        njoint += vz || vd1 || vd2;
    }
    const double inv = 1.0 / static_cast<double>(trials);
    report.rate_z = nz * inv;
    report.rate_d1 = nd1 * inv;
    report.rate_d2 = nd2 * inv;
    report.rate_joint = njoint * inv;

    report.monotonicity.rho_values = {0.0, 0.25, 0.5, 0.75, 1.0};
    report.monotonicity.trials_per_rho = mono_trials;
    for (std::size_t r = 0; r < report.monotonicity.rho_values.size(); ++r) {
        TheoryConfig c = cfg;
        c.rho_U = report.monotonicity.rho_values[r];
        double sum = 0.0;
        for (int k = 0; k < mono_trials; ++k) {
            const std::uint64_t trial_tag = 0x6d6f6e6f00000000ull + r;
            const TwoLayerPair pair =
                sample_pair(c, derive_seed(base_seed, trial_tag, static_cast<std::uint64_t>(k), 0));
            const ZProfile prof = z_profile(
                pair, c, grid, derive_seed(base_seed, trial_tag, static_cast<std::uint64_t>(k), 1));
            sum += prof.max_abs_z;
        }
        report.monotonicity.mean_max_z.push_back(sum / static_cast<double>(mono_trials));
    }
    report.monotonicity.spearman = spearman_rank_correlation(
        report.monotonicity.rho_values, report.monotonicity.mean_max_z);
    return report;
}

std::string bound_check_to_json(const BoundCheckReport& r) {
    nlohmann::json j;
    j["config"] = {{"h", r.cfg.h},         {"d", r.cfg.d},
                   {"b", r.cfg.b},         {"sigma_v", r.cfg.sigma_v},
                   {"sigma_U", r.cfg.sigma_U}, {"rho_v", r.cfg.rho_v},
                   {"rho_U", r.cfg.rho_U}, {"delta", r.cfg.delta},
                   {"n_x", r.cfg.n_x},     {"alpha_grid_size", r.cfg.alpha_grid_size}};
    j["base_seed"] = r.base_seed;
    j["trials"] = r.trials;
    j["bounds"] = {{"b_z", r.bounds.b_z}, {"b_d1", r.bounds.b_d1}, {"b_d2", r.bounds.b_d2}};
    j["per_trial_max"] = {{"z", r.max_z}, {"d1", r.max_d1}, {"d2", r.max_d2}};
    j["violation_rates"] = {{"z", r.rate_z},
                            {"d1", r.rate_d1},
                            {"d2", r.rate_d2},
                            {"joint", r.rate_joint}};
    j["monotonicity"] = {{"rho_values", r.monotonicity.rho_values},
                         {"mean_max_z", r.monotonicity.mean_max_z},
                         {"spearman", r.monotonicity.spearman},
                         {"trials_per_rho", r.monotonicity.trials_per_rho}};
    return j.dump(2);
}

}  // namespace tna
