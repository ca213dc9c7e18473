#include "tna/perm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "tna/connect.hpp"
#include "tna/kernels.hpp"
#include "tna/rng.hpp"

namespace tna {

void NetworkPermutation::validate() const {
    for (const std::vector<std::uint32_t>& p : perms) {
        std::vector<char> seen(p.size(), 0);
        for (std::uint32_t x : p) {
            if (x >= p.size() || seen[x])
                throw config_error("permutation is not a bijection");
            seen[x] = 1;
        }
    }
}

void NetworkPermutation::validate_for(const NetworkSpec& spec) const {
    validate();
    if (perms.size() + 2 != spec.layer_widths.size())
        throw config_error("permutation layer count does not match architecture");
    for (std::size_t h = 0; h < perms.size(); ++h) {
        if (perms[h].size() != spec.layer_widths[h + 1])
            throw config_error("permutation width mismatch at hidden layer " +
                               std::to_string(h + 1));
    }
}

bool NetworkPermutation::is_identity() const {
    for (const std::vector<std::uint32_t>& p : perms) {
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] != i) return false;
    }
    return true;
}

NetworkPermutation identity_permutation(const NetworkSpec& spec) {
    spec.validate();
    NetworkPermutation out;
    out.perms.resize(spec.depth() - 1);
    for (std::size_t h = 0; h + 1 < spec.depth(); ++h) {
        out.perms[h].resize(spec.layer_widths[h + 1]);
        for (std::size_t i = 0; i < out.perms[h].size(); ++i)
            out.perms[h][i] = static_cast<std::uint32_t>(i);
    }
    return out;
}

NetworkPermutation inverse(const NetworkPermutation& p) {
    p.validate();
    NetworkPermutation out;
    out.perms.resize(p.perms.size());
    for (std::size_t h = 0; h < p.perms.size(); ++h) {
        out.perms[h].resize(p.perms[h].size());
        for (std::size_t i = 0; i < p.perms[h].size(); ++i)
            out.perms[h][p.perms[h][i]] = static_cast<std::uint32_t>(i);
    }
    return out;
}

NetworkPermutation compose(const NetworkPermutation& p, const NetworkPermutation& q) {
    p.validate();
    q.validate();
    if (p.perms.size() != q.perms.size())
        throw config_error("compose: permutation layer counts differ");
    NetworkPermutation out;
    out.perms.resize(p.perms.size());
    for (std::size_t h = 0; h < p.perms.size(); ++h) {
        if (p.perms[h].size() != q.perms[h].size())
            throw config_error("compose: permutation widths differ");
        out.perms[h].resize(p.perms[h].size());
        for (std::size_t i = 0; i < p.perms[h].size(); ++i)
            out.perms[h][i] = p.perms[h][q.perms[h][i]];
    }
    return out;
}

LayeredNetwork apply_permutation(const LayeredNetwork& net, const NetworkPermutation& p) {
    p.validate_for(net.spec());
    const std::size_t L = net.depth();
    const std::size_t H = L - 1;
    LayeredNetwork out(net.spec());
    for (std::size_t l = 0; l < L; ++l) {
        const LayerLayout& lay = net.layer(l);
        const std::vector<std::uint32_t>* prow = l < H ? &p.perms[l] : nullptr;
        const std::vector<std::uint32_t>* pcol = l > 0 ? &p.perms[l - 1] : nullptr;
        const double* win = net.weight(l);
        double* wout = out.weight(l);
        for (std::size_t i = 0; i < lay.rows; ++i) {
            const std::size_t si = prow ? (*prow)[i] : i;
            const double* src = win + si * lay.cols;
            double* dst = wout + i * lay.cols;
            if (pcol) {
                for (std::size_t j = 0; j < lay.cols; ++j) dst[j] = src[(*pcol)[j]];
            } else {
                std::memcpy(dst, src, lay.cols * sizeof(double));
            }
            out.bias(l)[i] = net.bias(l)[prow ? (*prow)[i] : i];
        }
    }
    return out;
}

namespace {

struct LapSolution {
    std::vector<std::uint32_t> col_of_row;
    std::vector<int> row_of_col;
    std::vector<double> u, v;  // duals: cost(i,j) - u[i] - v[j] >= 0, = 0 on matched
    double cost = 0.0;
};

// Shortest augmenting path method with potentials, minimizing; column n is
// the virtual start column.
LapSolution lap_minimize(const Matrix& a) {
    const std::size_t n = a.rows;
    const double inf = std::numeric_limits<double>::infinity();
    LapSolution s;
    s.u.assign(n, 0.0);
    s.v.assign(n + 1, 0.0);
    std::vector<int> p(n + 1, -1);  // p[j] = row matched to column j
    std::vector<std::size_t> way(n + 1, n);
    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        p[n] = static_cast<int>(i);
        std::size_t j0 = n;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            std::size_t j1 = n;
            for (std::size_t j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double cur = a.at(i0, j) - s.u[i0] - s.v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    if (p[j] >= 0) s.u[p[j]] += delta;
                    s.v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != -1);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != n);
    }
    s.row_of_col.assign(p.begin(), p.begin() + n);
    s.col_of_row.assign(n, 0);
    s.cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        s.col_of_row[static_cast<std::size_t>(p[j])] = static_cast<std::uint32_t>(j);
        s.cost += a.at(static_cast<std::size_t>(p[j]), j);
    }
    return s;
}

// Kuhn augmenting-path matching used by the lexicographic refinement.
bool try_match(const std::vector<std::vector<std::uint32_t>>& adj, std::size_t row,
               std::vector<char>& visited, std::vector<int>& match_col) {
    for (std::uint32_t j : adj[row]) {
        if (visited[j]) continue;
        visited[j] = 1;
        if (match_col[j] < 0 ||
            try_match(adj, static_cast<std::size_t>(match_col[j]), visited, match_col)) {
            match_col[j] = static_cast<int>(row);
            return true;
        }
    }
    return false;
}

// Among all minimum-cost assignments (perfect matchings in the tight-edge
// graph of the optimal duals), picks the lexicographically smallest
// permutation by greedy row-by-row fixing with feasibility checks.
std::vector<std::uint32_t> lex_smallest_optimal(const Matrix& a, const LapSolution& s) {
    const std::size_t n = a.rows;
    double scale = 1.0;
    for (double x : a.data) scale = std::max(scale, std::abs(x));
    const double tol = 1e-9 * scale;

    std::vector<std::vector<std::uint32_t>> tight(n);
    std::size_t edges = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(a.at(i, j) - s.u[i] - s.v[j]) <= tol) {
                tight[i].push_back(static_cast<std::uint32_t>(j));
                ++edges;
            }
        }
    }
    if (edges == n) return s.col_of_row;  // unique optimum

    std::vector<std::uint32_t> result(n);
    std::vector<char> col_taken(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        bool fixed = false;
        for (std::uint32_t j : tight[i]) {
            if (col_taken[j]) continue;
            // Feasibility: rows i+1..n-1 must still match into free columns.
            col_taken[j] = 1;
            std::vector<std::vector<std::uint32_t>> adj(n);
            for (std::size_t r = i + 1; r < n; ++r) {
                for (std::uint32_t c : tight[r])
                    if (!col_taken[c]) adj[r].push_back(c);
            }
            bool ok = true;
            std::vector<int> free_match(n, -1);
            for (std::size_t r = i + 1; r < n && ok; ++r) {
                std::vector<char> visited(n, 0);
                ok = try_match(adj, r, visited, free_match);
            }
            if (ok) {
                result[i] = j;
                fixed = true;
                break;
            }
            col_taken[j] = 0;
        }
        if (!fixed) throw numeric_error("assignment tie-break failed to find a matching");
    }
    return result;
}

}  // namespace

AssignmentResult solve_assignment(const AssignmentProblem& problem) {
    const Matrix& c = problem.cost;
    if (c.rows != c.cols || c.rows == 0)
        throw config_error("assignment cost matrix must be square and nonempty");
    if (!kern::all_finite(c.data.data(), c.data.size()))
        throw config_error("assignment cost matrix has non-finite entries");

    Matrix work = c;
    if (problem.sense == AssignmentSense::maximize) {
        for (double& x : work.data) x = -x;
    }
    const LapSolution s = lap_minimize(work);
    AssignmentResult out;
    out.perm = lex_smallest_optimal(work, s);
    out.objective = 0.0;
    for (std::size_t i = 0; i < c.rows; ++i) out.objective += c.at(i, out.perm[i]);
    return out;
}

namespace {

// Assignment profit for hidden layer h given the current permutations of the
// neighbouring layers: current-layer row alignment, next-layer column
// alignment, and the bias outer product.
Matrix matching_profit(const LayeredNetwork& a, const LayeredNetwork& b,
                       const NetworkPermutation& cur, std::size_t h) {
    const LayerLayout& lay = a.layer(h);
    const std::size_t m = lay.rows;
    const std::size_t c = lay.cols;
    const std::size_t H = a.depth() - 1;

    // Columns of W_h^b reindexed by the previous layer's permutation.
    Matrix bh(m, c);
    const double* wb = b.weight(h);
    if (h == 0) {
        std::memcpy(bh.data.data(), wb, m * c * sizeof(double));
    } else {
        const std::vector<std::uint32_t>& prev = cur.perms[h - 1];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) bh.at(i, j) = wb[i * c + prev[j]];
    }
    Matrix profit(m, m);
    kern::affine_nt(a.weight(h), m, c, bh.data.data(), m, nullptr, profit.data.data());

    // Next layer: rows of W_{h+1}^b reindexed by the next permutation
    // (identity at the output layer).
    const LayerLayout& nlay = a.layer(h + 1);
    Matrix b2(nlay.rows, nlay.cols);
    const double* wb2 = b.weight(h + 1);
    if (h + 1 < H) {
        const std::vector<std::uint32_t>& next = cur.perms[h + 1];
        for (std::size_t k = 0; k < nlay.rows; ++k)
            std::memcpy(b2.row(k), wb2 + next[k] * nlay.cols, nlay.cols * sizeof(double));
    } else {
        std::memcpy(b2.data.data(), wb2, nlay.rows * nlay.cols * sizeof(double));
    }
    Matrix m2(m, m);
    kern::gemm_tn(a.weight(h + 1), nlay.rows, nlay.cols, b2.data.data(), b2.cols,
                  m2.data.data());
    for (std::size_t i = 0; i < m * m; ++i) profit.data[i] += m2.data[i];

    const double* ba = a.bias(h);
    const double* bb = b.bias(h);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < m; ++p) profit.at(i, p) += ba[i] * bb[p];
    return profit;
}

double assignment_value(const Matrix& profit, const std::vector<std::uint32_t>& perm) {
    double s = 0.0;
    for (std::size_t i = 0; i < profit.rows; ++i) s += profit.at(i, perm[i]);
    return s;
}

}  // namespace

WeightMatchResult weight_match(const LayeredNetwork& w_a, const LayeredNetwork& w_b,
                               int max_sweeps, std::uint64_t seed) {
    if (w_a.spec().layer_widths != w_b.spec().layer_widths)
        throw config_error("weight_match: architecture mismatch");
    if (max_sweeps < 1) throw config_error("weight_match: max_sweeps must be >= 1");

    WeightMatchResult out;
    out.perm = identity_permutation(w_a.spec());
    const std::size_t H = out.perm.perms.size();
    std::vector<std::size_t> layer_order(H);

    int sweeps = 0;
    bool changed = true;
    while (changed && sweeps < max_sweeps) {
        changed = false;
        ++sweeps;
        for (std::size_t h = 0; h < H; ++h) layer_order[h] = h;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(sweeps)));
        rng.shuffle(layer_order);
        for (std::size_t h : layer_order) {
            const Matrix profit = matching_profit(w_a, w_b, out.perm, h);
            const double cur_val = assignment_value(profit, out.perm.perms[h]);
            AssignmentProblem prob;
            prob.cost = profit;
            prob.sense = AssignmentSense::maximize;
            AssignmentResult res = solve_assignment(prob);
            if (res.objective > cur_val) {
                out.perm.perms[h] = std::move(res.perm);
                changed = true;
            }
        }
    }
    out.sweeps_used = sweeps;
    out.objective = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        const Matrix profit = matching_profit(w_a, w_b, out.perm, h);
        out.objective += assignment_value(profit, out.perm.perms[h]);
    }
    return out;
}

SaMatchResult simulated_annealing_match(const LayeredNetwork& w_a, const LayeredNetwork& w_b,
                                        const Dataset& data, int iters, SaSchedule schedule,
                                        std::uint64_t seed, Loss loss) {
    if (w_a.spec().layer_widths != w_b.spec().layer_widths)
        throw config_error("simulated_annealing_match: architecture mismatch");
    if (iters < 0) throw config_error("simulated_annealing_match: iters must be >= 0");
    data.validate_for(w_a.spec());
    if (data.size() == 0) throw data_error("simulated_annealing_match: empty dataset");

    // Fixed evaluation batch: the first min(1024, n) rows.
    std::vector<std::uint32_t> idx(std::min<std::size_t>(1024, data.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    const Dataset batch = data.subset(idx);

    SaMatchResult out;
    out.perm = identity_permutation(w_a.spec());

    auto midpoint_loss = [&](const NetworkPermutation& p) {
        const LayeredNetwork permuted = apply_permutation(w_b, p);
        LayeredNetwork mid(w_a.spec());
        mid.set_params(interpolate(w_a.params(), permuted.params(), 0.5));
        return evaluate(mid, batch, loss).loss;
    };

    double cur_loss = midpoint_loss(out.perm);
    out.initial_loss = cur_loss;
    const std::size_t H = out.perm.perms.size();
    std::vector<std::size_t> swappable;
    for (std::size_t h = 0; h < H; ++h)
        if (out.perm.perms[h].size() >= 2) swappable.push_back(h);
    if (swappable.empty() || iters == 0) return out;

    Rng rng(seed);
    double t = schedule.t0;
    for (int it = 0; it < iters; ++it) {
        const std::size_t h = swappable[rng.below(swappable.size())];
        std::vector<std::uint32_t>& p = out.perm.perms[h];
        const std::size_t i = rng.below(p.size());
        std::size_t j = rng.below(p.size() - 1);
        if (j >= i) ++j;
        std::swap(p[i], p[j]);
        const double cand_loss = midpoint_loss(out.perm);
        const double delta = cand_loss - cur_loss;
        bool accept = delta < 0.0;
        if (!accept && t > 0.0) accept = rng.uniform() < std::exp(-delta / t);
        if (accept) {
            cur_loss = cand_loss;
        } else {
            std::swap(p[i], p[j]);  // revert
        }
        t *= schedule.decay;
        out.trace.push_back(cur_loss);
    }
    return out;
}

std::string permutation_to_json(const NetworkPermutation& p) {
    nlohmann::json j = nlohmann::json::array();
    for (const std::vector<std::uint32_t>& layer : p.perms) j.push_back(layer);
    return j.dump();
}

NetworkPermutation permutation_from_json(const std::string& text) {
    NetworkPermutation out;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("permutation JSON parse error: ") + e.what());
    }
    if (!j.is_array()) throw io_error("permutation JSON must be an array of arrays");
    for (const nlohmann::json& layer : j) {
        if (!layer.is_array()) throw io_error("permutation JSON must be an array of arrays");
        std::vector<std::uint32_t> p;
        for (const nlohmann::json& x : layer) {
            if (!x.is_number_unsigned()) throw io_error("permutation entries must be nonnegative integers");
            p.push_back(x.get<std::uint32_t>());
        }
        out.perms.push_back(std::move(p));
    }
    out.validate();
    return out;
}

}  // namespace tna
