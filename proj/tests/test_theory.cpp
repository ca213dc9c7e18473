#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "helpers.hpp"
#include "tna/theory.hpp"

using tna::TheoryConfig;
using tna::TwoLayerPair;

namespace {

TheoryConfig small_cfg() {
    TheoryConfig cfg;
    cfg.h = 32;
    cfg.d = 8;
    cfg.n_x = 512;
    cfg.alpha_grid_size = 25;
    return cfg;
}

double sample_std(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::size_t count_zeros(const std::vector<std::uint8_t>& bits) {
    std::size_t z = 0;
    for (auto b : bits) z += b == 0 ? 1u : 0u;
    return z;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("config validation") {
    TheoryConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.h = 0;
    CHECK_THROWS_AS(bad.validate(), tna::config_error);
    bad = cfg;
    bad.sigma_v = 0.0;
    CHECK_THROWS_AS(bad.validate(), tna::config_error);
    bad = cfg;
    bad.rho_U = 1.5;
    CHECK_THROWS_AS(bad.validate(), tna::config_error);
    bad = cfg;
    bad.delta = 0.0;
    CHECK_THROWS_AS(bad.validate(), tna::config_error);
    bad = cfg;
    bad.alpha_grid_size = 2;
    CHECK_THROWS_AS(bad.validate(), tna::config_error);
}

TEST_CASE("sample_pair freezes exactly floor(rho n) shared entries") {
    TheoryConfig cfg;
    cfg.h = 317;
    cfg.d = 317;
    cfg.rho_U = 0.4;
    cfg.rho_v = 0.3;
    const TwoLayerPair p = tna::sample_pair(cfg, 5);
    CHECK(count_zeros(p.mask_U) == 40195);  // floor(0.4 * 317 * 317)
    CHECK(count_zeros(p.mask_v) == 95);     // floor(0.3 * 317)
    std::size_t disagree_frozen = 0, agree_free = 0, free_total = 0;
    for (std::size_t i = 0; i < p.mask_U.size(); ++i) {
        if (p.mask_U[i] == 0) {
            if (std::memcmp(&p.U.data[i], &p.U2.data[i], sizeof(double)) != 0)
                ++disagree_frozen;
        } else {
            ++free_total;
            if (p.U.data[i] == p.U2.data[i]) ++agree_free;
        }
    }
    CHECK(disagree_frozen == 0);
    CHECK(agree_free < free_total / 10);  // independent draws coincide rarely
}

TEST_CASE("sample_pair entries have the configured spread") {
    TheoryConfig cfg;
    cfg.h = 317;
    cfg.d = 317;
    const TwoLayerPair p = tna::sample_pair(cfg, 7);
    CHECK(sample_std(p.U.data) == doctest::Approx(cfg.sigma_U).epsilon(0.02));
    CHECK(sample_std(p.U2.data) == doctest::Approx(cfg.sigma_U).epsilon(0.02));
    CHECK(sample_std(p.v) == doctest::Approx(cfg.sigma_v).epsilon(0.15));
}

TEST_CASE("sample_pair is deterministic in the seed") {
    const auto cfg = small_cfg();
    const auto a = tna::sample_pair(cfg, 9);
    const auto b = tna::sample_pair(cfg, 9);
    CHECK(testhelp::bitwise_equal(a.U.data, b.U.data));
    CHECK(testhelp::bitwise_equal(a.v2, b.v2));
    CHECK(a.mask_U == b.mask_U);
    const auto c = tna::sample_pair(cfg, 10);
    CHECK_FALSE(testhelp::bitwise_equal(a.U.data, c.U.data));
}

TEST_CASE("uniform_alpha_grid spans [0,1] with exact endpoints") {
    const auto g = tna::uniform_alpha_grid(25);
    REQUIRE(g.size() == 25);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    CHECK(g[12] == 0.5);
    CHECK_THROWS_AS(tna::uniform_alpha_grid(1), tna::config_error);
}

TEST_CASE("zhat vanishes exactly at the endpoints") {
    const auto cfg = small_cfg();
    const auto pair = tna::sample_pair(cfg, 11);
    const auto prof = tna::z_profile(pair, cfg, tna::uniform_alpha_grid(cfg.alpha_grid_size), 12);
    CHECK(prof.zhat.front() == 0.0);
    CHECK(prof.zhat.back() == 0.0);
    CHECK(prof.se.front() == 0.0);
    CHECK(prof.se.back() == 0.0);
    CHECK(prof.max_abs_z > 0.0);  // interior is generically nonzero
    CHECK(std::isnan(prof.d1_fd.front()));
    CHECK(std::isnan(prof.d2_fd.back()));
}

TEST_CASE("fully frozen pair gives an identically zero profile") {
    auto cfg = small_cfg();
    cfg.rho_U = 1.0;
    cfg.rho_v = 1.0;
    const auto pair = tna::sample_pair(cfg, 13);
    CHECK(testhelp::bitwise_equal(pair.U.data, pair.U2.data));
    CHECK(testhelp::bitwise_equal(pair.v, pair.v2));
    const auto prof = tna::z_profile(pair, cfg, tna::uniform_alpha_grid(25), 14);
    for (double z : prof.zhat) CHECK(z == 0.0);
    for (double d1 : prof.d1_analytic) CHECK(d1 == 0.0);
    CHECK(prof.max_abs_z == 0.0);
    CHECK(prof.max_abs_d1 == 0.0);
    CHECK(prof.max_abs_d2 == 0.0);
}

TEST_CASE("finite differences agree with the analytic first derivative") {
    auto cfg = small_cfg();
    cfg.alpha_grid_size = 41;
    const auto pair = tna::sample_pair(cfg, 15);
    const auto grid = tna::uniform_alpha_grid(41);
    const auto prof = tna::z_profile(pair, cfg, grid, 16);
    int compared = 0;
    for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
        if (prof.kink[k - 1] || prof.kink[k] || prof.kink[k + 1]) continue;
        CHECK(std::abs(prof.d1_fd[k] - 0.5 * (prof.d1_analytic[k - 1] + prof.d1_analytic[k + 1])) <
              2e-3);
        CHECK(std::abs(prof.d1_fd[k] - prof.d1_analytic[k]) < 2e-3);
        ++compared;
    }
    CHECK(compared > 10);
}

TEST_CASE("z_profile validates its inputs") {
    const auto cfg = small_cfg();
    const auto pair = tna::sample_pair(cfg, 17);
    CHECK_THROWS_AS(tna::z_profile(pair, cfg, {0.0, 1.0}, 18), tna::config_error);
    CHECK_THROWS_AS(tna::z_profile(pair, cfg, {0.0, 0.5, 0.4, 1.0}, 18), tna::config_error);
    CHECK_THROWS_AS(tna::z_profile(pair, cfg, {0.0, 0.5, 1.5}, 18), tna::config_error);
    auto other = cfg;
    other.h = 16;
    CHECK_THROWS_AS(tna::z_profile(pair, other, tna::uniform_alpha_grid(5), 18),
                    tna::config_error);
}

TEST_CASE("theorem bounds match the closed forms") {
    TheoryConfig cfg;
    cfg.h = 512;
    cfg.d = 32;
    cfg.b = 1.0;
    cfg.sigma_v = 0.05;
    cfg.sigma_U = 0.05;
    cfg.delta = 0.05;
    cfg.rho_U = 0.4;
    cfg.rho_v = 0.4;
    const auto bounds = tna::theorem_bounds(cfg);
    // [DERIVED] sqrt(2) * b * sv * sU * log(8h/delta) * sqrt(h) * sqrt(1 - rhoU)
    CHECK(bounds.b_z == doctest::Approx(0.70107185674435568).epsilon(1e-12));

    const double base = cfg.b * cfg.sigma_v * cfg.sigma_U * std::sqrt(512.0);
    const double want_d1 = 4.0 * std::sqrt(2.0) * base * std::log(24.0 * 512.0 / 0.05) *
                           (std::sqrt(0.6) + std::sqrt(0.6));
    const double want_d2 = 8.0 * base * std::log(4.0 * 512.0 / 0.05) * std::sqrt(0.6);
    CHECK(bounds.b_d1 == doctest::Approx(want_d1).epsilon(1e-12));
    CHECK(bounds.b_d2 == doctest::Approx(want_d2).epsilon(1e-12));
}

TEST_CASE("theorem bounds vanish and scale as the formulas dictate") {
    TheoryConfig cfg;
    cfg.rho_U = 1.0;
    CHECK(tna::theorem_bounds(cfg).b_z == 0.0);
    cfg.rho_v = 1.0;
    const auto both = tna::theorem_bounds(cfg);
    CHECK(both.b_d1 == 0.0);
    CHECK(both.b_d2 == 0.0);

    TheoryConfig unit;
    const auto one = tna::theorem_bounds(unit);
    auto doubled = unit;
    doubled.b = 2.0;
    const auto two = tna::theorem_bounds(doubled);
    CHECK(two.b_z == 2.0 * one.b_z);
    CHECK(two.b_d1 == 2.0 * one.b_d1);
    CHECK(two.b_d2 == 2.0 * one.b_d2);
    auto scaled = unit;
    scaled.sigma_v = 4.0 * unit.sigma_v;
    const auto four = tna::theorem_bounds(scaled);
    CHECK(four.b_z == doctest::Approx(4.0 * one.b_z).epsilon(1e-14));
}

TEST_CASE("spearman rank correlation on hand-checked series") {
    CHECK(tna::spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) ==
          doctest::Approx(1.0));
    CHECK(tna::spearman_rank_correlation({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
    // monotone but nonlinear is still a perfect rank fit
    CHECK(tna::spearman_rank_correlation({1, 2, 3}, {1, 100, 10000}) == doctest::Approx(1.0));
    // tie in a: ranks {1.5, 1.5, 3} vs {1, 2, 3}
    CHECK(tna::spearman_rank_correlation({1, 1, 2}, {1, 2, 3}) ==
          doctest::Approx(1.5 / std::sqrt(3.0)));
    CHECK(tna::spearman_rank_correlation({5, 5, 5}, {1, 2, 3}) == 0.0);
    CHECK_THROWS_AS(tna::spearman_rank_correlation({1}, {1}), tna::config_error);
    CHECK_THROWS_AS(tna::spearman_rank_correlation({1, 2}, {1, 2, 3}), tna::config_error);
}

TEST_CASE("bound_check reports sub-delta violation rates on a small battery") {
    auto cfg = small_cfg();
    cfg.h = 64;
    cfg.n_x = 256;
    cfg.delta = 0.1;
    const auto report = tna::bound_check(cfg, 50, 21, 3);
    CHECK(report.trials == 50);
    CHECK(report.max_z.size() == 50);
    CHECK(report.rate_z <= cfg.delta);
    CHECK(report.rate_d1 <= cfg.delta);
    CHECK(report.rate_d2 <= cfg.delta);
    CHECK(report.rate_joint >= report.rate_z);
    CHECK(report.bounds.b_z > 0.0);
    for (double m : report.max_z) CHECK(m >= 0.0);

    const auto& mono = report.monotonicity;
    CHECK(mono.rho_values == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    REQUIRE(mono.mean_max_z.size() == 5);
    CHECK(mono.trials_per_rho == 3);
    // rho_U = 1 freezes U entirely; only v-side rounding noise remains
    CHECK(mono.mean_max_z.back() < 1e-12);
    CHECK(mono.mean_max_z.front() > 1e-6);
    CHECK(mono.spearman < 0.0);  // larger rho_U shrinks the barrier proxy

    const std::string json = tna::bound_check_to_json(report);
    CHECK(json.find("violation_rates") != std::string::npos);
    CHECK(json.find("monotonicity") != std::string::npos);
    CHECK(json.find("per_trial_max") != std::string::npos);
}

TEST_CASE("fully frozen bound_check is identically zero") {
    auto cfg = small_cfg();
    cfg.h = 16;
    cfg.n_x = 64;
    cfg.rho_U = 1.0;
    cfg.rho_v = 1.0;
    const auto report = tna::bound_check(cfg, 50, 23, 1);
    CHECK(report.rate_z == 0.0);
    CHECK(report.rate_d1 == 0.0);
    CHECK(report.rate_d2 == 0.0);
    CHECK(report.rate_joint == 0.0);
    for (double m : report.max_z) CHECK(m == 0.0);
    for (double m : report.max_d1) CHECK(m == 0.0);
    for (double m : report.max_d2) CHECK(m == 0.0);
}

TEST_CASE("bound_check rejects tiny batteries") {
    const auto cfg = small_cfg();
    CHECK_THROWS_AS(tna::bound_check(cfg, 49, 1, 1), tna::config_error);
    CHECK_THROWS_AS(tna::bound_check(cfg, 50, 1, 0), tna::config_error);
}

}  // TEST_SUITE
