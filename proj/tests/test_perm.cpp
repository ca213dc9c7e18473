#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "tna/nn.hpp"
#include "tna/perm.hpp"
#include "tna/rng.hpp"

using tna::AssignmentProblem;
using tna::AssignmentSense;
using tna::LayeredNetwork;
using tna::Loss;
using tna::NetworkPermutation;
using tna::NetworkSpec;
using tna::OutputHead;

namespace {

NetworkPermutation random_permutation(const NetworkSpec& spec, std::uint64_t seed) {
    tna::Rng rng(seed);
    NetworkPermutation p = tna::identity_permutation(spec);
    for (auto& layer : p.perms) rng.shuffle(layer);
    return p;
}

LayeredNetwork random_net(const NetworkSpec& spec, std::uint64_t seed) {
    auto s = spec;
    s.init_seed = seed;
    return tna::build_network(s);
}

// Exhaustive optimum over all n! assignments; ties resolved lexicographically.
std::pair<std::vector<std::uint32_t>, double> brute_force(const tna::Matrix& cost,
                                                          AssignmentSense sense) {
    const std::size_t n = cost.rows;
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::vector<std::uint32_t> best;
    double best_obj = 0.0;
    do {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += cost.at(i, perm[i]);
        const bool better = best.empty() ||
                            (sense == AssignmentSense::minimize ? obj < best_obj
                                                                : obj > best_obj) ||
                            (obj == best_obj && perm < best);
        if (better) {
            best = perm;
            best_obj = obj;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, best_obj};
}

}  // namespace

TEST_SUITE("perm") {

TEST_CASE("identity permutation validates and acts as a no-op") {
    const auto spec = testhelp::make_spec({3, 5, 4, 2});
    const auto id = tna::identity_permutation(spec);
    CHECK(id.perms.size() == 2);  // hidden layers only
    CHECK(id.is_identity());
    CHECK_NOTHROW(id.validate());
    CHECK_NOTHROW(id.validate_for(spec));

    const auto net = random_net(spec, 3);
    const auto same = tna::apply_permutation(net, id);
    CHECK(testhelp::bitwise_equal(same.to_params(), net.to_params()));
}

TEST_CASE("permutation validation rejects non-bijections and wrong shapes") {
    NetworkPermutation p;
    p.perms = {{0, 0, 2}};
    CHECK_THROWS_AS(p.validate(), tna::config_error);
    p.perms = {{0, 1, 3}};
    CHECK_THROWS_AS(p.validate(), tna::config_error);
    p.perms = {{2, 0, 1}};
    CHECK_NOTHROW(p.validate());

    const auto spec = testhelp::make_spec({3, 4, 2});
    CHECK_THROWS_AS(p.validate_for(spec), tna::config_error);  // width 3 vs 4
    NetworkPermutation two;
    two.perms = {{0, 1, 2, 3}, {0, 1}};
    CHECK_THROWS_AS(two.validate_for(spec), tna::config_error);  // layer count
}

TEST_CASE("apply_permutation preserves the network function") {
    tna::Rng seeds(100);
    const std::vector<std::vector<std::size_t>> shapes = {
        {2, 5, 1}, {3, 8, 8, 2}, {4, 6, 5, 3, 2}};
    int triples = 0;
    for (const auto& widths : shapes) {
        for (int rep = 0; rep < 9; ++rep) {
            const auto spec = testhelp::make_spec(widths, OutputHead::linear, 0);
            const auto net = random_net(spec, seeds.next_u64());
            const auto p = random_permutation(spec, seeds.next_u64());
            const auto permuted = tna::apply_permutation(net, p);
            const auto ds = testhelp::random_regression(6, widths.front(), widths.back(),
                                                        seeds.next_u64());
            const auto ya = tna::forward(net, ds.inputs);
            const auto yb = tna::forward(permuted, ds.inputs);
            CHECK(testhelp::max_abs_diff(ya.data, yb.data) < 1e-5);
            ++triples;
        }
    }
    CHECK(triples == 27);
}

TEST_CASE("inverse permutation round-trips bit-exactly") {
    const auto spec = testhelp::make_spec({3, 7, 6, 2});
    const auto net = random_net(spec, 11);
    const auto p = random_permutation(spec, 12);
    const auto back = tna::apply_permutation(tna::apply_permutation(net, p), tna::inverse(p));
    CHECK(testhelp::bitwise_equal(back.to_params(), net.to_params()));
    // compose(p, inverse(p)) is the identity
    CHECK(tna::compose(p, tna::inverse(p)).is_identity());
}

TEST_CASE("compose applies left argument first") {
    const auto spec = testhelp::make_spec({2, 6, 6, 1});
    const auto net = random_net(spec, 21);
    const auto p = random_permutation(spec, 22);
    const auto q = random_permutation(spec, 23);
    const auto sequential = tna::apply_permutation(tna::apply_permutation(net, p), q);
    const auto composed = tna::apply_permutation(net, tna::compose(p, q));
    CHECK(testhelp::bitwise_equal(sequential.to_params(), composed.to_params()));

    NetworkPermutation narrow;
    narrow.perms = {{0, 1, 2}};
    CHECK_THROWS_AS(tna::compose(p, narrow), tna::config_error);
}

TEST_CASE("solve_assignment on a diagonal-friendly cost returns identity") {
    AssignmentProblem prob;
    prob.cost.resize(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) prob.cost.at(i, j) = i == j ? 0.0 : 5.0;
    const auto res = tna::solve_assignment(prob);
    CHECK(res.perm == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(res.objective == doctest::Approx(0.0));
}

TEST_CASE("solve_assignment [[1,2],[2,1]] keeps the identity at objective 2") {
    AssignmentProblem prob;
    prob.cost.resize(2, 2);
    prob.cost.at(0, 0) = 1.0;
    prob.cost.at(0, 1) = 2.0;
    prob.cost.at(1, 0) = 2.0;
    prob.cost.at(1, 1) = 1.0;
    const auto res = tna::solve_assignment(prob);
    CHECK(res.perm == std::vector<std::uint32_t>{0, 1});
    CHECK(res.objective == doctest::Approx(2.0));
}

TEST_CASE("solve_assignment matches brute force on random real costs") {
    tna::Rng rng(31);
    for (int rep = 0; rep < 100; ++rep) {
        AssignmentProblem prob;
        prob.cost.resize(6, 6);
        for (double& c : prob.cost.data) c = rng.uniform(-2.0, 2.0);
        const auto res = tna::solve_assignment(prob);
        const auto [bp, bo] = brute_force(prob.cost, AssignmentSense::minimize);
        CHECK(res.objective == doctest::Approx(bo).epsilon(1e-10));
        CHECK(res.perm == bp);
    }
}

TEST_CASE("solve_assignment breaks ties lexicographically") {
    tna::Rng rng(37);
    for (int rep = 0; rep < 50; ++rep) {
        AssignmentProblem prob;
        prob.cost.resize(6, 6);
        // small integer entries force many optimal assignments
        for (double& c : prob.cost.data) c = static_cast<double>(rng.below(3));
        const auto res = tna::solve_assignment(prob);
        const auto [bp, bo] = brute_force(prob.cost, AssignmentSense::minimize);
        CHECK(res.objective == doctest::Approx(bo));
        CHECK(res.perm == bp);
    }
}

TEST_CASE("solve_assignment supports maximization") {
    tna::Rng rng(41);
    for (int rep = 0; rep < 30; ++rep) {
        AssignmentProblem prob;
        prob.sense = AssignmentSense::maximize;
        prob.cost.resize(5, 5);
        for (double& c : prob.cost.data) c = static_cast<double>(rng.below(4));
        const auto res = tna::solve_assignment(prob);
        const auto [bp, bo] = brute_force(prob.cost, AssignmentSense::maximize);
        CHECK(res.objective == doctest::Approx(bo));
        CHECK(res.perm == bp);
    }
}

TEST_CASE("solve_assignment validates its input") {
    AssignmentProblem empty;
    CHECK_THROWS_AS(tna::solve_assignment(empty), tna::config_error);
    AssignmentProblem rect;
    rect.cost.resize(2, 3);
    CHECK_THROWS_AS(tna::solve_assignment(rect), tna::config_error);
    AssignmentProblem nan;
    nan.cost.resize(2, 2);
    nan.cost.at(0, 0) = std::nan("");
    CHECK_THROWS_AS(tna::solve_assignment(nan), tna::config_error);
}

TEST_CASE("weight_match of identical networks is the identity in one sweep") {
    const auto spec = testhelp::make_spec({4, 10, 3});
    const auto net = random_net(spec, 51);
    const auto res = tna::weight_match(net, net, 50, 1);
    CHECK(res.perm.is_identity());
    CHECK(res.sweeps_used == 1);
}

TEST_CASE("weight_match recovers a planted permutation bit-exactly") {
    for (auto widths : std::vector<std::vector<std::size_t>>{{5, 8, 2}, {6, 32, 32, 4}}) {
        const auto spec = testhelp::make_spec(widths);
        const auto net_a = random_net(spec, 61);
        const auto plant = random_permutation(spec, 62);
        const auto net_b = tna::apply_permutation(net_a, tna::inverse(plant));
        const auto res = tna::weight_match(net_a, net_b, 100, 63);
        const auto aligned = tna::apply_permutation(net_b, res.perm);
        CHECK(testhelp::bitwise_equal(aligned.to_params(), net_a.to_params()));
    }
}

TEST_CASE("weight_match objective is non-decreasing in the sweep budget") {
    const auto spec = testhelp::make_spec({4, 16, 16, 3});
    const auto net_a = random_net(spec, 71);
    const auto net_b = random_net(spec, 72);
    double prev = -1e300;
    for (int sweeps : {1, 2, 5, 20}) {
        const auto res = tna::weight_match(net_a, net_b, sweeps, 73);
        CHECK(res.objective >= prev - 1e-12);
        prev = res.objective;
    }
    CHECK_THROWS_AS(tna::weight_match(net_a, net_b, 0, 73), tna::config_error);

    const auto other = random_net(testhelp::make_spec({4, 15, 16, 3}), 74);
    CHECK_THROWS_AS(tna::weight_match(net_a, other, 5, 73), tna::config_error);
}

TEST_CASE("simulated annealing with zero iterations returns the identity") {
    const auto spec = testhelp::make_spec({3, 8, 2});
    const auto a = random_net(spec, 81);
    const auto b = random_net(spec, 82);
    const auto ds = testhelp::random_regression(32, 3, 2, 83);
    const auto res = tna::simulated_annealing_match(a, b, ds, 0, tna::SaSchedule{}, 84,
                                                    Loss::mse);
    CHECK(res.perm.is_identity());
    CHECK(res.trace.empty());
    CHECK(res.initial_loss > 0.0);
    CHECK_THROWS_AS(
        tna::simulated_annealing_match(a, b, ds, -1, tna::SaSchedule{}, 84, Loss::mse),
        tna::config_error);
}

TEST_CASE("greedy annealing (t0=0) never accepts a worsening move") {
    const auto spec = testhelp::make_spec({3, 10, 2});
    const auto a = random_net(spec, 91);
    const auto b = random_net(spec, 92);
    const auto ds = testhelp::random_regression(48, 3, 2, 93);
    tna::SaSchedule greedy;
    greedy.t0 = 0.0;
    const auto res = tna::simulated_annealing_match(a, b, ds, 200, greedy, 94, Loss::mse);
    REQUIRE(res.trace.size() == 200);
    double cur = res.initial_loss;
    for (double t : res.trace) {
        CHECK(t <= cur + 1e-12);
        cur = t;
    }
    CHECK(res.trace.back() <= res.initial_loss);
}

TEST_CASE("simulated annealing is deterministic in its seed") {
    const auto spec = testhelp::make_spec({3, 8, 2});
    const auto a = random_net(spec, 95);
    const auto b = random_net(spec, 96);
    const auto ds = testhelp::random_regression(32, 3, 2, 97);
    const auto r1 = tna::simulated_annealing_match(a, b, ds, 150, tna::SaSchedule{}, 98,
                                                   Loss::mse);
    const auto r2 = tna::simulated_annealing_match(a, b, ds, 150, tna::SaSchedule{}, 98,
                                                   Loss::mse);
    CHECK(r1.perm.perms == r2.perm.perms);
    CHECK(testhelp::bitwise_equal(r1.trace, r2.trace));
    const auto r3 = tna::simulated_annealing_match(a, b, ds, 150, tna::SaSchedule{}, 99,
                                                   Loss::mse);
    CHECK((r1.perm.perms != r3.perm.perms || !testhelp::bitwise_equal(r1.trace, r3.trace)));
}

TEST_CASE("permutation JSON round-trips and rejects malformed input") {
    const auto spec = testhelp::make_spec({2, 5, 4, 1});
    const auto p = random_permutation(spec, 101);
    const auto text = tna::permutation_to_json(p);
    const auto back = tna::permutation_from_json(text);
    CHECK(back.perms == p.perms);
    CHECK_THROWS_AS(tna::permutation_from_json("not json"), tna::io_error);
    CHECK_THROWS_AS(tna::permutation_from_json("{\"a\":1}"), tna::io_error);
    CHECK_THROWS_AS(tna::permutation_from_json("[[0,-1]]"), tna::io_error);
}

}  // TEST_SUITE
