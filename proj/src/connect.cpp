#include "tna/connect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tna/kernels.hpp"

namespace tna {

namespace {

// The call boundary forces both products to round to double before the add.
// Inline, the compiler may contract one product into an FMA, and
// fma(x, y, round(z*w)) != fma(z, w, round(x*y)) in the last bit, which
// would break the transpose symmetry plane_slice promises.
__attribute__((noinline)) double rounded_sum(double a, double b) { return a + b; }

}  // namespace

std::size_t default_alpha_grid_size() { return 25; }

ParamVector interpolate(const ParamVector& w1, const ParamVector& w2, double alpha) {
    if (w1.size() != w2.size()) throw config_error("interpolate: layout mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw config_error("interpolate: alpha outside [0,1]");
    ParamVector out(w1.size());
    kern::lerp_vec(w1.data(), w2.data(), alpha, out.data(), w1.size());
    return out;
}

InterpolationProfile sweep(const NetworkSpec& spec, const ParamVector& w1,
                           const ParamVector& w2, const Dataset& data, std::size_t grid_size,
                           Loss loss) {
    spec.validate();
    if (grid_size < 2) throw config_error("sweep: grid_size must be >= 2");
    if (w1.size() != spec.param_count() || w2.size() != spec.param_count())
        throw config_error("sweep: parameter vectors do not match the architecture");
    data.validate_for(spec);

    InterpolationProfile p;
    p.alphas.resize(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i)
        p.alphas[i] = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    p.alphas.front() = 0.0;
    p.alphas.back() = 1.0;

    const bool classification = data.is_classification();
    p.loss_interp.resize(grid_size);
    p.loss_mix.resize(grid_size);
    if (classification) {
        p.acc_interp.resize(grid_size);
        p.acc_mix.resize(grid_size);
    }

    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < grid_size; ++i) {
        try {
            LayeredNetwork net(spec);
            net.set_params(interpolate(w1, w2, p.alphas[i]));
            const Metrics m = evaluate(net, data, loss);
            p.loss_interp[i] = m.loss;
            if (classification) p.acc_interp[i] = *m.accuracy;
        } catch (const std::exception& e) {
#pragma omp critical
            if (failure.empty())
                failure = "sweep failed at alpha=" + std::to_string(p.alphas[i]) + ": " + e.what();
        }
    }
    if (!failure.empty()) throw numeric_error(failure);

    // alpha=1 is w1, alpha=0 is w2.
    p.endpoint_w1.loss = p.loss_interp.back();
    p.endpoint_w2.loss = p.loss_interp.front();
    if (classification) {
        p.endpoint_w1.accuracy = p.acc_interp.back();
        p.endpoint_w2.accuracy = p.acc_interp.front();
    }
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double a = p.alphas[i];
        p.loss_mix[i] = kern::lerp(p.endpoint_w1.loss, p.endpoint_w2.loss, a);
        if (classification)
            p.acc_mix[i] = kern::lerp(*p.endpoint_w1.accuracy, *p.endpoint_w2.accuracy, a);
    }
    return p;
}

namespace {
void check_profile(const InterpolationProfile& p) {
    if (p.alphas.size() < 2 || p.loss_interp.size() != p.alphas.size() ||
        p.loss_mix.size() != p.alphas.size())
        throw config_error("interpolation profile is not populated");
}
}  // namespace

double loss_barrier(const InterpolationProfile& p) {
    check_profile(p);
    double best = p.loss_interp[0] - p.loss_mix[0];
    for (std::size_t i = 1; i < p.alphas.size(); ++i)
        best = std::max(best, p.loss_interp[i] - p.loss_mix[i]);
    return best;
}

double acc_barrier(const InterpolationProfile& p) {
    check_profile(p);
    if (p.acc_interp.size() != p.alphas.size())
        throw config_error("acc_barrier requires a classification profile");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.alphas.size(); ++i) {
        if (!(p.acc_mix[i] > 0.0))
            throw numeric_error("acc_barrier: degenerate endpoints, accuracy mix is zero at alpha=" +
                                std::to_string(p.alphas[i]));
        best = std::max(best, 1.0 - p.acc_interp[i] / p.acc_mix[i]);
    }
    return best;
}

BarrierReport barrier_report(const InterpolationProfile& p) {
    check_profile(p);
    BarrierReport r;
    r.grid_size = p.alphas.size();
    r.loss_barrier = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.alphas.size(); ++i) {
        const double v = p.loss_interp[i] - p.loss_mix[i];
        if (v > r.loss_barrier) {
            r.loss_barrier = v;
            r.loss_barrier_alpha = p.alphas[i];
        }
    }
    if (p.acc_interp.size() == p.alphas.size()) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p.alphas.size(); ++i) {
            if (!(p.acc_mix[i] > 0.0))
                throw numeric_error("acc_barrier: degenerate endpoints at alpha=" +
                                    std::to_string(p.alphas[i]));
            const double v = 1.0 - p.acc_interp[i] / p.acc_mix[i];
            if (v > best) {
                best = v;
                r.acc_barrier_alpha = p.alphas[i];
            }
        }
        r.acc_barrier = best;
    }
    return r;
}

ParamVector multi_fuse(const std::vector<ParamVector>& models,
                       const std::vector<double>* weights) {
    if (models.size() < 2) throw config_error("multi_fuse needs at least 2 models");
    const std::size_t d = models[0].size();
    for (const ParamVector& m : models) {
        if (m.size() != d) throw config_error("multi_fuse: layout mismatch");
    }
    std::vector<double> w;
    if (weights) {
        w = *weights;
        if (w.size() != models.size())
            throw config_error("multi_fuse: weight count does not match model count");
        double sum = 0.0;
        for (double x : w) {
            if (!(x >= 0.0)) throw config_error("multi_fuse: weights must be nonnegative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw config_error("multi_fuse: weights must sum to 1");
    } else {
        w.assign(models.size(), 1.0 / static_cast<double>(models.size()));
    }

    ParamVector out(d);
#pragma omp parallel for schedule(static) if (d > 65536)
    for (std::size_t k = 0; k < d; ++k) {
        // Coordinates on which every model agrees pass through exactly; this
        // keeps frozen coordinates bit-identical under aggregation.
        bool all_equal = true;
        for (std::size_t i = 1; i < models.size() && all_equal; ++i)
            all_equal = models[i][k] == models[0][k];
        if (all_equal) {
            out[k] = models[0][k];
            continue;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < models.size(); ++i) s += w[i] * models[i][k];
        out[k] = s;
    }
    return out;
}

LandscapeGrid plane_slice(const NetworkSpec& spec, const ParamVector& origin,
                          const ParamVector& w_a, const ParamVector& w_b, const Dataset& data,
                          std::size_t resolution, Loss loss, double lo, double hi) {
    spec.validate();
    const std::size_t d = spec.param_count();
    if (origin.size() != d || w_a.size() != d || w_b.size() != d)
        throw config_error("plane_slice: parameter vectors do not match the architecture");
    if (resolution < 2) throw config_error("plane_slice: resolution must be >= 2");
    if (!(hi > lo)) throw config_error("plane_slice: empty extent");
    data.validate_for(spec);

    ParamVector da(d), db(d);
    for (std::size_t k = 0; k < d; ++k) {
        da[k] = w_a[k] - origin[k];
        db[k] = w_b[k] - origin[k];
    }
    const double na = std::sqrt(kern::dot(da.data(), da.data(), d));
    if (na == 0.0) throw config_error("plane_slice: w_a equals origin (degenerate basis)");
    LandscapeGrid g;
    g.origin = origin;
    g.lo = lo;
    g.hi = hi;
    g.u.resize(d);
    for (std::size_t k = 0; k < d; ++k) g.u[k] = da[k] / na;
    const double proj = kern::dot(db.data(), g.u.data(), d);
    ParamVector v(d);
    double nv2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        v[k] = db[k] - proj * g.u[k];
        nv2 += v[k] * v[k];
    }
    const double nv = std::sqrt(nv2);
    const double nb = std::sqrt(kern::dot(db.data(), db.data(), d));
    if (nb == 0.0 || nv <= 1e-12 * nb)
        throw config_error("plane_slice: points are collinear (degenerate basis)");
    g.v.resize(d);
    for (std::size_t k = 0; k < d; ++k) g.v[k] = v[k] / nv;

    std::vector<double> s(resolution);
    for (std::size_t i = 0; i < resolution; ++i)
        s[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);

    g.losses.resize(resolution, resolution);
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t cell = 0; cell < resolution * resolution; ++cell) {
        const std::size_t i = cell / resolution;
        const std::size_t j = cell % resolution;
        try {
            LayeredNetwork net(spec);
            ParamVector p(d);
            // Cell (i,j) and its transpose under a swapped (w_a, w_b) add the
            // same two rounded products, so the grids are exact transposes.
            for (std::size_t k = 0; k < d; ++k)
                p[k] = origin[k] + rounded_sum(s[i] * da[k], s[j] * db[k]);
            net.set_params(p);
            g.losses.at(i, j) = evaluate(net, data, loss).loss;
        } catch (const std::exception& e) {
#pragma omp critical
            if (failure.empty()) failure = std::string("plane_slice cell failed: ") + e.what();
        }
    }
    if (!failure.empty()) throw numeric_error(failure);
    return g;
}

std::string profile_csv(const InterpolationProfile& p) {
    std::ostringstream out;
    out.precision(17);
    const bool cls = p.acc_interp.size() == p.alphas.size();
    out << "alpha,loss_interp,loss_mix";
    if (cls) out << ",acc_interp,acc_mix";
    out << "\n";
    for (std::size_t i = 0; i < p.alphas.size(); ++i) {
        out << p.alphas[i] << "," << p.loss_interp[i] << "," << p.loss_mix[i];
        if (cls) out << "," << p.acc_interp[i] << "," << p.acc_mix[i];
        out << "\n";
    }
    return out.str();
}

std::string grid_csv(const LandscapeGrid& g) {
    std::ostringstream out;
    out.precision(17);
    out << "i,j,s_i,s_j,loss\n";
    const std::size_t res = g.losses.rows;
    for (std::size_t i = 0; i < res; ++i) {
        for (std::size_t j = 0; j < res; ++j) {
            const double si =
                g.lo + (g.hi - g.lo) * static_cast<double>(i) / static_cast<double>(res - 1);
            const double sj =
                g.lo + (g.hi - g.lo) * static_cast<double>(j) / static_cast<double>(res - 1);
            out << i << "," << j << "," << si << "," << sj << "," << g.losses.at(i, j) << "\n";
        }
    }
    return out.str();
}

}  // namespace tna
