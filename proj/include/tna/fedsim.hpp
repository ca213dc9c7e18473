#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tna/mask.hpp"
#include "tna/nn.hpp"

namespace tna {

enum class FedMethod { fedavg, fedpfn, fedpnu };

struct FederatedSeeds {
    std::uint64_t partition = 0;
    std::uint64_t masks = 0;
    std::uint64_t selection = 0;
    std::uint64_t training = 0;
};

struct FederatedConfig {
    NetworkSpec model;
    int n_clients = 20;
    int rounds = 30;           // T
    int local_epochs = 5;      // E
    FedMethod method = FedMethod::fedavg;
    double mask_ratio = 0.4;   // rho, used by fedpfn/fedpnu
    double dir = 0.1;          // Dirichlet concentration
    double selection_ratio = 1.0;
    double lr0 = 0.08;
    double lr_decay_per_round = 0.99;
    int batch_size = 64;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    FederatedSeeds seeds;

    void validate() const;
};

struct ClientPartition {
    std::vector<std::vector<std::uint32_t>> assignment;
    std::vector<std::vector<std::size_t>> class_histogram;  // [client][class]
    std::size_t n_classes = 0;
};

// Per-class Dirichlet(dir) proportion split of the shuffled class indices;
// clients left empty are repaired by stealing one sample from the largest
// client (lowest id on ties).
ClientPartition dirichlet_partition(const std::vector<std::int32_t>& labels, int n_clients,
                                    double dir, std::uint64_t seed);

// One client's local training pass: epochs of masked SGD from w_start on its
// shard (reversed_phase trains under the reversed mask, FedPNU's second
// phase).  epochs == 0 returns w_start unchanged.  A fresh optimizer state
// (zero momentum) is used per call.
ParamVector local_update(const ParamVector& w_start, const NetworkSpec& spec,
                         const Dataset& shard, int epochs, const GradientMask* mask,
                         bool reversed_phase, double lr, double momentum, double weight_decay,
                         int batch_size, std::uint64_t shuffle_seed);

// Weighted average with weights lambda (must be normalized); coordinates on
// which all clients agree bitwise pass through exactly.
ParamVector aggregate(const std::vector<ParamVector>& client_params,
                      const std::vector<double>& lambda);

struct RoundState {
    int round = 0;  // 1-based
    ParamVector global_before;
    ParamVector global_after;
    const GradientMask* mask = nullptr;  // null for fedavg
    std::vector<std::uint32_t> selected;  // ascending client ids
    std::vector<double> lambdas;          // aligned with selected
    double lr = 0.0;
    Metrics test_metrics;
};

using RoundObserver = std::function<void(const RoundState&)>;

struct RoundRecord {
    int round = 0;
    double test_loss = 0.0;
    double test_acc = 0.0;
    double lr = 0.0;
};

struct FederatedRunReport {
    std::vector<RoundRecord> rounds;
    double final_accuracy = 0.0;  // mean test accuracy of the last 5 rounds
    ClientPartition partition;
};

// Full simulation: per round the server resamples the mask (fedpfn/fedpnu),
// selects clients uniformly without replacement, runs local updates (a
// parallel map whose result does not depend on processing order), aggregates
// with sample-count weights renormalized over the selected subset, evaluates
// on test data, and decays the learning rate.
FederatedRunReport run_federated(const FederatedConfig& cfg, const Dataset& train,
                                 const Dataset& test, const RoundObserver& observer = {});

std::string fed_report_csv(const FederatedRunReport& report);

std::string method_name(FedMethod m);
FedMethod method_from_name(const std::string& name);

}  // namespace tna
