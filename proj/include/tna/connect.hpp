#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tna/nn.hpp"

namespace tna {

// Metrics along the segment alpha*w1 + (1-alpha)*w2 (alpha weights w1) and
// the matching linear mixes of the endpoint metrics.  Accuracy vectors are
// empty for regression data.
struct InterpolationProfile {
    std::vector<double> alphas;  // sorted, includes 0 and 1
    std::vector<double> loss_interp;
    std::vector<double> loss_mix;
    std::vector<double> acc_interp;
    std::vector<double> acc_mix;
    Metrics endpoint_w1;
    Metrics endpoint_w2;
};

struct BarrierReport {
    double loss_barrier = 0.0;
    double loss_barrier_alpha = 0.0;
    std::optional<double> acc_barrier;
    double acc_barrier_alpha = 0.0;
    std::size_t grid_size = 0;
};

// Loss values over a 2-D affine slice through three parameter vectors.
// Cell (i, j) is the loss at origin + s_i*(w_a - origin) + s_j*(w_b - origin)
// with s the shared axis grid; u and v are the Gram-Schmidt orthonormal
// basis of the slice for rendering.
struct LandscapeGrid {
    ParamVector origin;
    ParamVector u;
    ParamVector v;
    Matrix losses;
    double lo = 0.0;
    double hi = 1.0;
};

// alpha*w1 + (1-alpha)*w2; exact at the endpoints and wherever the inputs
// agree bitwise.
ParamVector interpolate(const ParamVector& w1, const ParamVector& w2, double alpha);

InterpolationProfile sweep(const NetworkSpec& spec, const ParamVector& w1,
                           const ParamVector& w2, const Dataset& data, std::size_t grid_size,
                           Loss loss);

// sup_alpha [L(interp) - mix], approximated by the grid maximum; negative
// values are kept (interpolation uniformly better than the mix).
double loss_barrier(const InterpolationProfile& profile);

// sup_alpha [1 - A(interp)/mix]; requires a classification profile with a
// strictly positive accuracy mix at every grid point.
double acc_barrier(const InterpolationProfile& profile);

BarrierReport barrier_report(const InterpolationProfile& profile);

// Weighted element-wise average; weights default to uniform and must be
// nonnegative with sum 1 (tolerance 1e-9).  Coordinates on which all models
// agree bitwise are copied through exactly.
ParamVector multi_fuse(const std::vector<ParamVector>& models,
                       const std::vector<double>* weights = nullptr);

LandscapeGrid plane_slice(const NetworkSpec& spec, const ParamVector& origin,
                          const ParamVector& w_a, const ParamVector& w_b, const Dataset& data,
                          std::size_t resolution, Loss loss, double lo = -0.25,
                          double hi = 1.25);

std::string profile_csv(const InterpolationProfile& profile);
std::string grid_csv(const LandscapeGrid& grid);

std::size_t default_alpha_grid_size();  // 25

}  // namespace tna
