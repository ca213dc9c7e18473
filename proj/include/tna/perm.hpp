#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tna/nn.hpp"

namespace tna {

// Per-hidden-layer neuron permutations pi_1..pi_{L-1}; input and output
// layers are implicitly identity (Pi_0 = Pi_L = I).  perms[h][i] = p means
// neuron p of the source network becomes neuron i of the permuted network
// in hidden layer h+1.
struct NetworkPermutation {
    std::vector<std::vector<std::uint32_t>> perms;

    void validate() const;          // each entry a bijection
    void validate_for(const NetworkSpec& spec) const;
    bool is_identity() const;
};

NetworkPermutation identity_permutation(const NetworkSpec& spec);
NetworkPermutation inverse(const NetworkPermutation& p);

// compose(p, q) applied once equals applying p then q.
NetworkPermutation compose(const NetworkPermutation& p, const NetworkPermutation& q);

// W_l <- Pi_l W_l Pi_{l-1}^T, b_l <- Pi_l b_l; pure entry shuffling, so the
// network function is unchanged and round-trips are bit-exact.
LayeredNetwork apply_permutation(const LayeredNetwork& net, const NetworkPermutation& p);

enum class AssignmentSense { minimize, maximize };

struct AssignmentProblem {
    Matrix cost;  // square
    AssignmentSense sense = AssignmentSense::minimize;
};

struct AssignmentResult {
    std::vector<std::uint32_t> perm;  // perm[row] = assigned column
    double objective = 0.0;
};

// Exact optimum by shortest augmenting paths (Jonker-Volgenant, O(n^3)).
// Among all optimal assignments, returns the lexicographically smallest
// permutation (perm[0] minimized first, then perm[1], ...).
AssignmentResult solve_assignment(const AssignmentProblem& problem);

struct WeightMatchResult {
    NetworkPermutation perm;  // permutation to apply to w_b
    int sweeps_used = 0;
    double objective = 0.0;
};

// Git Re-Basin style weight matching: coordinate descent over hidden layers,
// each step solving a linear assignment on the bilinear alignment profit
// (current-layer rows, next-layer columns, bias outer product).  Layer order
// is reshuffled every sweep from seed; stops when a full sweep changes no
// layer or after max_sweeps.
WeightMatchResult weight_match(const LayeredNetwork& w_a, const LayeredNetwork& w_b,
                               int max_sweeps, std::uint64_t seed = 0);

struct SaSchedule {
    double t0 = 1.0;
    double decay = 0.95;
};

struct SaMatchResult {
    NetworkPermutation perm;
    std::vector<double> trace;  // midpoint loss after each iteration
    double initial_loss = 0.0;
};

// Simulated annealing on the permutation applied to w_b: proposals swap two
// neurons in one random hidden layer; the objective is the loss of the
// alpha = 0.5 interpolation on a fixed evaluation batch (the first
// min(1024, n) rows of data).
SaMatchResult simulated_annealing_match(const LayeredNetwork& w_a, const LayeredNetwork& w_b,
                                        const Dataset& data, int iters, SaSchedule schedule,
                                        std::uint64_t seed, Loss loss);

// JSON array-of-arrays round-trip.
std::string permutation_to_json(const NetworkPermutation& p);
NetworkPermutation permutation_from_json(const std::string& text);

}  // namespace tna
