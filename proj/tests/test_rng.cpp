#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "tna/rng.hpp"

using tna::Rng;
using tna::derive_seed;
using tna::mix64;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces every stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 200; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
        CHECK(a.gamma(0.7) == b.gamma(0.7));
        CHECK(a.below(1000) == b.below(1000));
    }
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.uniform() == b.uniform()) ++same;
    CHECK(same < 4);
}

TEST_CASE("derive_seed separates indices and bases") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t base = 0; base < 8; ++base)
        for (std::uint64_t idx = 0; idx < 64; ++idx) seen.insert(derive_seed(base, idx));
    CHECK(seen.size() == 8 * 64);
    CHECK(derive_seed(5, 1, 2) != derive_seed(5, 2, 1));
    CHECK(derive_seed(5, 1, 2, 3) != derive_seed(5, 1, 2, 4));
    CHECK(mix64(1) != mix64(2));
}

TEST_CASE("uniform bounds and mean") {
    Rng rng(7);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / 10000.0 - 0.5) < 0.02);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-3.0, 2.0);
        CHECK(u >= -3.0);
        CHECK(u < 2.0);
    }
}

TEST_CASE("normal moments") {
    Rng rng(11);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("gamma moments cover both shape regimes") {
    // E[gamma(a)] = a, Var = a.
    for (const double shape : {0.1, 0.5, 2.0, 7.5}) {
        Rng rng(static_cast<std::uint64_t>(shape * 100) + 3);
        const int n = 20000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = rng.gamma(shape);
            CHECK(g >= 0.0);
            sum += g;
        }
        const double mean = sum / n;
        const double tol = 5.0 * std::sqrt(shape / n) + 1e-3;
        CHECK(std::abs(mean - shape) < tol);
    }
}

TEST_CASE("below stays in range and hits every value") {
    Rng rng(13);
    std::vector<int> hits(10, 0);
    for (int i = 0; i < 5000; ++i) {
        const std::uint32_t v = rng.below(10);
        REQUIRE(v < 10);
        ++hits[v];
    }
    for (int h : hits) CHECK(h > 300);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<std::uint32_t> v(50);
    for (std::uint32_t i = 0; i < 50; ++i) v[i] = i;
    std::vector<std::uint32_t> w = v;
    Rng(99).shuffle(v);
    Rng(99).shuffle(w);
    CHECK(v == w);
    std::vector<std::uint32_t> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    CHECK(v != sorted);  // 50! leaves this astronomically unlikely to fail
}

TEST_CASE("choose_k draws distinct in-range values") {
    Rng rng(5);
    const auto picked = rng.choose_k(100, 20);
    REQUIRE(picked.size() == 20);
    std::set<std::uint32_t> uniq(picked.begin(), picked.end());
    CHECK(uniq.size() == 20);
    for (std::uint32_t p : picked) CHECK(p < 100);

    Rng rng2(6);
    auto all = rng2.choose_k(10, 10);
    std::sort(all.begin(), all.end());
    for (std::uint32_t i = 0; i < 10; ++i) CHECK(all[i] == i);
}

TEST_CASE("ball samples stay inside the radius") {
    Rng rng(21);
    std::vector<double> x(8);
    double max_norm = 0.0;
    for (int i = 0; i < 500; ++i) {
        rng.ball(2.5, x.size(), x.data());
        double n2 = 0.0;
        for (double c : x) n2 += c * c;
        const double norm = std::sqrt(n2);
        CHECK(norm <= 2.5 + 1e-12);
        max_norm = std::max(max_norm, norm);
    }
    // In 8 dimensions most of the ball's volume hugs the boundary.
    CHECK(max_norm > 2.0);
}

}  // TEST_SUITE
