#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "tna/connect.hpp"
#include "tna/nn.hpp"
#include "tna/perm.hpp"

using tna::Dataset;
using tna::InterpolationProfile;
using tna::LayeredNetwork;
using tna::Loss;
using tna::OutputHead;
using tna::ParamVector;

namespace {

double eval_at(const tna::NetworkSpec& spec, const ParamVector& w, const Dataset& ds,
               Loss loss) {
    LayeredNetwork net(spec);
    net.set_params(w);
    return tna::evaluate(net, ds, loss).loss;
}

InterpolationProfile synth_profile(std::vector<double> alphas, std::vector<double> li,
                                   std::vector<double> lm, std::vector<double> ai = {},
                                   std::vector<double> am = {}) {
    InterpolationProfile p;
    p.alphas = std::move(alphas);
    p.loss_interp = std::move(li);
    p.loss_mix = std::move(lm);
    p.acc_interp = std::move(ai);
    p.acc_mix = std::move(am);
    return p;
}

}  // namespace

TEST_SUITE("connect") {

TEST_CASE("interpolate weights alpha toward w1 and is exact at endpoints") {
    const ParamVector w1 = {2.0, -1.0, 0.5};
    const ParamVector w2 = {4.0, 3.0, 0.5};
    const ParamVector mid = tna::interpolate(w1, w2, 0.5);
    CHECK(mid[0] == doctest::Approx(3.0));
    CHECK(mid[1] == doctest::Approx(1.0));
    CHECK(mid[2] == 0.5);  // equal coordinate passes through bitwise
    CHECK(testhelp::bitwise_equal(tna::interpolate(w1, w2, 1.0), w1));
    CHECK(testhelp::bitwise_equal(tna::interpolate(w1, w2, 0.0), w2));
    const ParamVector q = tna::interpolate(w1, w2, 0.25);
    CHECK(q[0] == doctest::Approx(0.25 * 2.0 + 0.75 * 4.0));
    CHECK_THROWS_AS(tna::interpolate(w1, ParamVector{1.0}, 0.5), tna::config_error);
    CHECK_THROWS_AS(tna::interpolate(w1, w2, -0.1), tna::config_error);
    CHECK_THROWS_AS(tna::interpolate(w1, w2, 1.5), tna::config_error);
}

TEST_CASE("sweep of identical endpoints has exactly zero barrier") {
    const auto spec = testhelp::make_spec({3, 8, 2}, OutputHead::linear, 5);
    const auto w = tna::build_network(spec).to_params();
    const auto ds = testhelp::random_regression(12, 3, 2, 6);
    const auto prof = tna::sweep(spec, w, w, ds, 25, Loss::mse);
    for (std::size_t i = 0; i < prof.alphas.size(); ++i) {
        CHECK(prof.loss_interp[i] == prof.loss_interp[0]);
        CHECK(prof.loss_mix[i] == prof.loss_interp[i]);
    }
    CHECK(tna::loss_barrier(prof) == 0.0);
}

TEST_CASE("sweep grid matches direct evaluation at each alpha") {
    const auto spec = testhelp::make_spec({2, 6, 3}, OutputHead::softmax_ce_logits, 7);
    auto sa = spec;
    sa.init_seed = 8;
    const auto w1 = tna::build_network(sa).to_params();
    auto sb = spec;
    sb.init_seed = 9;
    const auto w2 = tna::build_network(sb).to_params();
    const auto ds = testhelp::random_classification(40, 2, 3, 10);

    const auto prof = tna::sweep(spec, w1, w2, ds, 3, Loss::softmax_ce);
    REQUIRE(prof.alphas.size() == 3);
    CHECK(prof.alphas[0] == 0.0);
    CHECK(prof.alphas[1] == 0.5);
    CHECK(prof.alphas[2] == 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto w = tna::interpolate(w1, w2, prof.alphas[i]);
        CHECK(prof.loss_interp[i] == eval_at(spec, w, ds, Loss::softmax_ce));
    }
    // endpoint rows are the endpoint metrics themselves
    CHECK(prof.loss_interp[0] == prof.endpoint_w2.loss);
    CHECK(prof.loss_interp[2] == prof.endpoint_w1.loss);
    CHECK(prof.loss_mix[0] == prof.endpoint_w2.loss);
    CHECK(prof.loss_mix[2] == prof.endpoint_w1.loss);
    REQUIRE(prof.acc_interp.size() == 3);
    CHECK(prof.acc_interp[0] == *prof.endpoint_w2.accuracy);
    CHECK(prof.acc_interp[2] == *prof.endpoint_w1.accuracy);
    CHECK_THROWS_AS(tna::sweep(spec, w1, w2, ds, 1, Loss::softmax_ce), tna::config_error);
}

TEST_CASE("loss_barrier takes the grid maximum of interp minus mix") {
    const auto p = synth_profile({0.0, 0.5, 1.0}, {1.0, 1.5, 1.0}, {1.0, 1.0, 1.0});
    CHECK(tna::loss_barrier(p) == doctest::Approx(0.5));
    const auto r = tna::barrier_report(p);
    CHECK(r.loss_barrier == doctest::Approx(0.5));
    CHECK(r.loss_barrier_alpha == 0.5);
    CHECK(r.grid_size == 3);
    CHECK_FALSE(r.acc_barrier.has_value());
}

TEST_CASE("loss_barrier can be negative, never clamped") {
    // interpolation below the mix at every grid point: max is -0.1, not 0
    const auto p = synth_profile({0.0, 0.5, 1.0}, {0.9, 0.7, 0.8}, {1.0, 1.0, 1.0});
    CHECK(tna::loss_barrier(p) == doctest::Approx(-0.1));
}

TEST_CASE("acc_barrier follows the relative-drop definition") {
    const auto flat = synth_profile({0.0, 0.5, 1.0}, {1, 1, 1}, {1, 1, 1},
                                    {0.9, 0.9, 0.9}, {0.9, 0.9, 0.9});
    CHECK(tna::acc_barrier(flat) == doctest::Approx(0.0));

    const auto drop = synth_profile({0.0, 0.5, 1.0}, {1, 1, 1}, {1, 1, 1},
                                    {0.9, 0.0, 0.9}, {0.9, 0.9, 0.9});
    CHECK(tna::acc_barrier(drop) == doctest::Approx(1.0));

    // endpoints at 0.644, interpolation midpoint at 0.528:
    // barrier = 1 - 0.528/0.644
    const auto paper = synth_profile({0.0, 0.5, 1.0}, {1, 1, 1}, {1, 1, 1},
                                     {0.644, 0.528, 0.644}, {0.644, 0.644, 0.644});
    CHECK(tna::acc_barrier(paper) == doctest::Approx(1.0 - 0.528 / 0.644));
    CHECK(tna::acc_barrier(paper) == doctest::Approx(0.1801).epsilon(1e-3));

    const auto zero_mix = synth_profile({0.0, 0.5, 1.0}, {1, 1, 1}, {1, 1, 1},
                                        {0.5, 0.5, 0.5}, {0.0, 0.5, 0.5});
    CHECK_THROWS_AS(tna::acc_barrier(zero_mix), tna::numeric_error);

    const auto reg = synth_profile({0.0, 1.0}, {1, 1}, {1, 1});
    CHECK_THROWS_AS(tna::acc_barrier(reg), tna::config_error);

    InterpolationProfile empty;
    CHECK_THROWS_AS(tna::loss_barrier(empty), tna::config_error);
}

TEST_CASE("barrier estimates are monotone under grid refinement") {
    const auto spec = testhelp::make_spec({2, 10, 2}, OutputHead::softmax_ce_logits, 20);
    auto sa = spec;
    sa.init_seed = 21;
    auto sb = spec;
    sb.init_seed = 22;
    const auto w1 = tna::build_network(sa).to_params();
    const auto w2 = tna::build_network(sb).to_params();
    const auto ds = testhelp::random_classification(60, 2, 2, 23);
    // nested grids: {0,.5,1} subset of {0,.25,...} subset of ... so the max
    // can only grow
    double prev = -1e300;
    for (std::size_t g : {3ul, 5ul, 9ul, 17ul}) {
        const auto prof = tna::sweep(spec, w1, w2, ds, g, Loss::softmax_ce);
        const double b = tna::loss_barrier(prof);
        CHECK(b >= prev);
        prev = b;
    }
}

TEST_CASE("multi_fuse passes agreed coordinates through bitwise") {
    const ParamVector a = {1.0, 2.0, 0.3};
    const ParamVector b = {1.0, 4.0, 0.3};
    const ParamVector c = {1.0, 6.0, 0.3};
    const auto fused = tna::multi_fuse({a, b, c});
    CHECK(fused[0] == 1.0);
    CHECK(fused[1] == doctest::Approx(4.0));
    CHECK(std::memcmp(&fused[2], &a[2], sizeof(double)) == 0);
    // all models identical: exact pass-through of the whole vector
    const auto same = tna::multi_fuse({a, a, a, a});
    CHECK(testhelp::bitwise_equal(same, a));
}

TEST_CASE("multi_fuse honors weights and validates them") {
    const ParamVector a = {0.0, 10.0};
    const ParamVector b = {1.0, 20.0};
    const std::vector<double> w = {0.25, 0.75};
    const auto fused = tna::multi_fuse({a, b}, &w);
    CHECK(fused[0] == doctest::Approx(0.75));
    CHECK(fused[1] == doctest::Approx(17.5));

    const std::vector<double> bad_sum = {0.5, 0.6};
    CHECK_THROWS_AS(tna::multi_fuse({a, b}, &bad_sum), tna::config_error);
    const std::vector<double> neg = {1.5, -0.5};
    CHECK_THROWS_AS(tna::multi_fuse({a, b}, &neg), tna::config_error);
    const std::vector<double> short_w = {1.0};
    CHECK_THROWS_AS(tna::multi_fuse({a, b}, &short_w), tna::config_error);
    CHECK_THROWS_AS(tna::multi_fuse({a}), tna::config_error);
    CHECK_THROWS_AS(tna::multi_fuse({a, ParamVector{1.0}}), tna::config_error);
}

TEST_CASE("multi_fuse commutes with neuron permutation") {
    const auto spec = testhelp::make_spec({3, 6, 2}, OutputHead::linear, 30);
    auto sa = spec;
    sa.init_seed = 31;
    auto sb = spec;
    sb.init_seed = 32;
    const auto net_a = tna::build_network(sa);
    const auto net_b = tna::build_network(sb);
    tna::NetworkPermutation pi = tna::identity_permutation(spec);
    pi.perms[0] = {3, 0, 5, 1, 4, 2};

    tna::LayeredNetwork fused(spec);
    fused.set_params(tna::multi_fuse({net_a.to_params(), net_b.to_params()}));
    const auto fused_then_perm = tna::apply_permutation(fused, pi).to_params();
    const auto perm_then_fused =
        tna::multi_fuse({tna::apply_permutation(net_a, pi).to_params(),
                         tna::apply_permutation(net_b, pi).to_params()});
    CHECK(testhelp::bitwise_equal(fused_then_perm, perm_then_fused));
}

TEST_CASE("plane_slice hits the anchor points exactly") {
    const auto spec = testhelp::make_spec({2, 5, 1}, OutputHead::linear, 40);
    const std::size_t d = spec.param_count();
    const auto origin = testhelp::random_params(d, 41, 0.3);
    const auto wa = testhelp::random_params(d, 42, 0.3);
    const auto wb = testhelp::random_params(d, 43, 0.3);
    const auto ds = testhelp::random_regression(10, 2, 1, 44);

    // resolution 7 over [-0.25, 1.25]: s = -0.25 + 0.25 i, so s=0 at i=1 and
    // s=1 at i=5
    const auto g = tna::plane_slice(spec, origin, wa, wb, ds, 7, Loss::mse);
    CHECK(g.losses.rows == 7);
    CHECK(g.lo == -0.25);
    CHECK(g.hi == 1.25);
    // The origin cell evaluates origin + 0 and must be bit-exact. The w_a/w_b
    // cells reconstruct origin + (w - origin), which can differ from w in the
    // last ulp, so those only match to rounding error.
    CHECK(g.losses.at(1, 1) == eval_at(spec, origin, ds, Loss::mse));
    CHECK(g.losses.at(5, 1) == doctest::Approx(eval_at(spec, wa, ds, Loss::mse)).epsilon(1e-10));
    CHECK(g.losses.at(1, 5) == doctest::Approx(eval_at(spec, wb, ds, Loss::mse)).epsilon(1e-10));
}

TEST_CASE("plane_slice grids are exact transposes under argument swap") {
    const auto spec = testhelp::make_spec({2, 4, 1}, OutputHead::linear, 50);
    const std::size_t d = spec.param_count();
    const auto origin = testhelp::random_params(d, 51, 0.3);
    const auto wa = testhelp::random_params(d, 52, 0.3);
    const auto wb = testhelp::random_params(d, 53, 0.3);
    const auto ds = testhelp::random_regression(8, 2, 1, 54);
    const auto gab = tna::plane_slice(spec, origin, wa, wb, ds, 5, Loss::mse);
    const auto gba = tna::plane_slice(spec, origin, wb, wa, ds, 5, Loss::mse);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(std::memcmp(&gab.losses.data[i * 5 + j], &gba.losses.data[j * 5 + i],
                              sizeof(double)) == 0);
}

TEST_CASE("plane_slice rejects degenerate bases") {
    const auto spec = testhelp::make_spec({2, 3, 1}, OutputHead::linear, 60);
    const std::size_t d = spec.param_count();
    const auto origin = testhelp::random_params(d, 61, 0.3);
    const auto wa = testhelp::random_params(d, 62, 0.3);
    ParamVector collinear(d);
    for (std::size_t k = 0; k < d; ++k)
        collinear[k] = origin[k] + 2.0 * (wa[k] - origin[k]);
    const auto ds = testhelp::random_regression(6, 2, 1, 63);
    CHECK_THROWS_AS(tna::plane_slice(spec, origin, wa, collinear, ds, 5, Loss::mse),
                    tna::config_error);
    CHECK_THROWS_AS(tna::plane_slice(spec, origin, origin, wa, ds, 5, Loss::mse),
                    tna::config_error);
    CHECK_THROWS_AS(tna::plane_slice(spec, origin, wa, collinear, ds, 1, Loss::mse),
                    tna::config_error);
}

TEST_CASE("csv emitters carry the documented headers") {
    const auto spec = testhelp::make_spec({2, 4, 2}, OutputHead::softmax_ce_logits, 70);
    auto sb = spec;
    sb.init_seed = 71;
    const auto w1 = tna::build_network(spec).to_params();
    const auto w2 = tna::build_network(sb).to_params();
    const auto cls = testhelp::random_classification(16, 2, 2, 72);
    const auto prof = tna::sweep(spec, w1, w2, cls, 5, Loss::softmax_ce);
    const std::string csv = tna::profile_csv(prof);
    CHECK(csv.rfind("alpha,loss_interp,loss_mix,acc_interp,acc_mix\n", 0) == 0);
    // one data row per grid point
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

    const auto reg_spec = testhelp::make_spec({2, 4, 1}, OutputHead::linear, 73);
    auto rb = reg_spec;
    rb.init_seed = 74;
    const auto r1 = tna::build_network(reg_spec).to_params();
    const auto r2 = tna::build_network(rb).to_params();
    const auto reg = testhelp::random_regression(10, 2, 1, 75);
    const std::string rcsv =
        tna::profile_csv(tna::sweep(reg_spec, r1, r2, reg, 3, Loss::mse));
    CHECK(rcsv.rfind("alpha,loss_interp,loss_mix\n", 0) == 0);

    const auto grid = tna::plane_slice(reg_spec, r1, r2,
                                       testhelp::random_params(reg_spec.param_count(), 76, 0.3),
                                       reg, 3, Loss::mse);
    CHECK(tna::grid_csv(grid).rfind("i,j,s_i,s_j,loss\n", 0) == 0);

    CHECK(tna::default_alpha_grid_size() == 25);
}

}  // TEST_SUITE
