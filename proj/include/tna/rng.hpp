#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "tna/errors.hpp"

namespace tna {

// splitmix64 finalizer; used both as a seed mixer and to derive independent
// child streams from a base seed.  Distinct (base, index) pairs map to
// distinct, well-mixed seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base ^ mix64(index + 0x632be59bd9b4e019ull));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return derive_seed(derive_seed(base, a, b), c);
}

// Deterministic random stream.  All distributions are implemented here rather
// than with std:: distribution objects, whose output is implementation
// defined; the sequence produced for a given seed is stable across compilers
// and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(mix64(seed ^ 0x7f4a7c159e3779b9ull)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via the Marsaglia polar method; the rejected draws make
    // per-call consumption variable, which is fine for a sequential stream.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boosting
    // identity G(a) = G(a + 1) * U^{1/a}.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw config_error("gamma shape must be positive");
        if (shape < 1.0) {
            const double u = uniform();
            if (u == 0.0) return 0.0;
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u != 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Unbiased integer on [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw config_error("Rng::below requires n > 0");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::uint32_t> choose_k(std::uint32_t n, std::uint32_t k) {
        if (k > n) throw config_error("Rng::choose_k requires k <= n");
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::uint32_t> out(k);
        for (std::uint32_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
        return out;
    }

    // Uniform point in the closed d-ball of given radius: direction from a
    // normal draw, radius scaled by U^{1/d}.
    void ball(double radius, std::size_t dim, double* out) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            out[i] = normal();
            norm2 += out[i] * out[i];
        }
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) {
            for (std::size_t i = 0; i < dim; ++i) out[i] = 0.0;
            return;
        }
        const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
        const double scale = r / norm;
        for (std::size_t i = 0; i < dim; ++i) out[i] *= scale;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tna
