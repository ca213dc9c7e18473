#include "tna/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tna/connect.hpp"
#include "tna/rng.hpp"

namespace tna {

void FederatedConfig::validate() const {
    model.validate();
    if (n_clients < 2) throw config_error("fed: n_clients must be >= 2");
    if (rounds < 1) throw config_error("fed: rounds must be >= 1");
    if (local_epochs < 1) throw config_error("fed: local_epochs must be >= 1");
    if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0))
        throw config_error("fed: mask_ratio must be in [0,1]");
    if (!(dir > 0.0)) throw config_error("fed: Dirichlet concentration must be > 0");
    if (!(selection_ratio > 0.0 && selection_ratio <= 1.0))
        throw config_error("fed: selection_ratio must be in (0,1]");
    if (!(lr0 > 0.0)) throw config_error("fed: lr0 must be positive");
    if (!(lr_decay_per_round > 0.0 && lr_decay_per_round <= 1.0))
        throw config_error("fed: lr_decay_per_round must be in (0,1]");
    if (batch_size < 1) throw config_error("fed: batch_size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw config_error("fed: momentum must be in [0,1)");
    if (!(weight_decay >= 0.0)) throw config_error("fed: weight_decay must be nonnegative");
}

ClientPartition dirichlet_partition(const std::vector<std::int32_t>& labels, int n_clients,
                                    double dir, std::uint64_t seed) {
    if (n_clients < 1) throw config_error("dirichlet_partition: n_clients must be >= 1");
    if (!(dir > 0.0)) throw config_error("dirichlet_partition: concentration must be > 0");
    if (labels.size() < static_cast<std::size_t>(n_clients))
        throw config_error("dirichlet_partition: fewer samples than clients");

    std::int32_t max_label = 0;
    for (std::int32_t y : labels) {
        if (y < 0) throw data_error("dirichlet_partition: negative class label");
        max_label = std::max(max_label, y);
    }
    const std::size_t n_classes = static_cast<std::size_t>(max_label) + 1;

    ClientPartition part;
    part.n_classes = n_classes;
    part.assignment.resize(n_clients);

    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<std::uint32_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (static_cast<std::size_t>(labels[i]) == c) idx.push_back(static_cast<std::uint32_t>(i));
        if (idx.empty()) continue;
        Rng rng(derive_seed(seed, c));
        rng.shuffle(idx);
        std::vector<double> prop(n_clients);
        double sum = 0.0;
        for (int k = 0; k < n_clients; ++k) {
            prop[k] = rng.gamma(dir);
            sum += prop[k];
        }
        if (sum == 0.0) {
            // Degenerate underflow; fall back to a uniform split.
            std::fill(prop.begin(), prop.end(), 1.0);
            sum = static_cast<double>(n_clients);
        }
        double cum = 0.0;
        std::size_t prev = 0;
        for (int k = 0; k < n_clients; ++k) {
            cum += prop[k] / sum;
            std::size_t bound =
                k + 1 == n_clients
                    ? idx.size()
                    : static_cast<std::size_t>(std::floor(cum * static_cast<double>(idx.size())));
            bound = std::min(bound, idx.size());
            for (std::size_t i = prev; i < bound; ++i) part.assignment[k].push_back(idx[i]);
            prev = std::max(prev, bound);
        }
    }

    // Repair empty clients: steal the last index of the largest client
    // (lowest id on ties).  Feasible whenever labels.size() >= n_clients.
    for (int k = 0; k < n_clients; ++k) {
        if (!part.assignment[k].empty()) continue;
        int donor = -1;
        std::size_t donor_size = 1;  // donor must keep at least one sample
        for (int j = 0; j < n_clients; ++j) {
            if (part.assignment[j].size() > donor_size) {
                donor = j;
                donor_size = part.assignment[j].size();
            }
        }
        if (donor < 0) throw config_error("dirichlet_partition: cannot repair empty client");
        part.assignment[k].push_back(part.assignment[donor].back());
        part.assignment[donor].pop_back();
    }

    part.class_histogram.assign(n_clients, std::vector<std::size_t>(n_classes, 0));
    for (int k = 0; k < n_clients; ++k) {
        for (std::uint32_t i : part.assignment[k])
            ++part.class_histogram[k][static_cast<std::size_t>(labels[i])];
    }
    return part;
}

ParamVector local_update(const ParamVector& w_start, const NetworkSpec& spec,
                         const Dataset& shard, int epochs, const GradientMask* mask,
                         bool reversed_phase, double lr, double momentum, double weight_decay,
                         int batch_size, std::uint64_t shuffle_seed) {
    if (epochs < 0) throw config_error("local_update: epochs must be >= 0");
    if (epochs == 0) return w_start;
    LayeredNetwork net(spec);
    net.set_params(w_start);
    OptimizerState state(w_start.size(), lr, momentum, weight_decay);
    GradientMask reversed;
    const GradientMask* effective = mask;
    if (mask && reversed_phase) {
        reversed = reverse_mask(*mask);
        effective = &reversed;
    }
    train(net, shard, epochs, batch_size, state, effective, shuffle_seed, Loss::softmax_ce);
    return net.to_params();
}

ParamVector aggregate(const std::vector<ParamVector>& client_params,
                      const std::vector<double>& lambda) {
    if (client_params.empty()) throw config_error("aggregate: no client models");
    if (client_params.size() != lambda.size())
        throw config_error("aggregate: weight count mismatch");
    double sum = 0.0;
    for (double l : lambda) {
        if (!(l >= 0.0)) throw config_error("aggregate: weights must be nonnegative");
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw config_error("aggregate: weights must be normalized over selected clients");
    if (client_params.size() == 1) return client_params[0];
    return multi_fuse(client_params, &lambda);
}

namespace {
std::vector<std::uint32_t> select_clients(int n_clients, double ratio, std::uint64_t seed) {
    const std::uint32_t count = std::max<std::uint32_t>(
        1, static_cast<std::uint32_t>(
               std::llround(ratio * static_cast<double>(n_clients))));
    Rng rng(seed);
    std::vector<std::uint32_t> sel =
        rng.choose_k(static_cast<std::uint32_t>(n_clients), std::min<std::uint32_t>(count, n_clients));
    std::sort(sel.begin(), sel.end());
    return sel;
}
}  // namespace

FederatedRunReport run_federated(const FederatedConfig& cfg, const Dataset& train_data,
                                 const Dataset& test_data, const RoundObserver& observer) {
    cfg.validate();
    if (!train_data.is_classification() || !test_data.is_classification())
        throw data_error("run_federated: federated simulation requires classification data");
    train_data.validate_for(cfg.model);
    test_data.validate_for(cfg.model);

    FederatedRunReport report;
    report.partition =
        dirichlet_partition(train_data.labels, cfg.n_clients, cfg.dir, cfg.seeds.partition);

    std::vector<Dataset> shards(cfg.n_clients);
    for (int k = 0; k < cfg.n_clients; ++k)
        shards[k] = train_data.subset(report.partition.assignment[k]);

    LayeredNetwork global = build_network(cfg.model);
    double lr = cfg.lr0;

    for (int t = 1; t <= cfg.rounds; ++t) {
        GradientMask mask;
        const bool masked = cfg.method != FedMethod::fedavg;
        if (masked)
            mask = sample_mask(cfg.model, cfg.mask_ratio,
                               derive_seed(cfg.seeds.masks, static_cast<std::uint64_t>(t)));

        const std::vector<std::uint32_t> selected = select_clients(
            cfg.n_clients, cfg.selection_ratio,
            derive_seed(cfg.seeds.selection, static_cast<std::uint64_t>(t)));

        std::vector<ParamVector> locals(selected.size());
        std::string failure;
        const ParamVector w_g = global.to_params();
#pragma omp parallel for schedule(dynamic)
        for (std::size_t s = 0; s < selected.size(); ++s) {
            const std::uint32_t id = selected[s];
            try {
                const std::uint64_t base =
                    derive_seed(cfg.seeds.training, static_cast<std::uint64_t>(t), id);
                if (cfg.method == FedMethod::fedpnu) {
                    const int e1 = cfg.local_epochs / 2;
                    const int e2 = cfg.local_epochs - e1;
                    ParamVector w = local_update(w_g, cfg.model, shards[id], e1, &mask, false,
                                                 lr, cfg.momentum, cfg.weight_decay,
                                                 cfg.batch_size, derive_seed(base, 0));
                    locals[s] = local_update(w, cfg.model, shards[id], e2, &mask, true, lr,
                                             cfg.momentum, cfg.weight_decay, cfg.batch_size,
                                             derive_seed(base, 1));
                } else {
                    locals[s] = local_update(w_g, cfg.model, shards[id], cfg.local_epochs,
                                             masked ? &mask : nullptr, false, lr, cfg.momentum,
                                             cfg.weight_decay, cfg.batch_size,
                                             derive_seed(base, 0));
                }
            } catch (const std::exception& e) {
#pragma omp critical
                if (failure.empty())
                    failure = "round " + std::to_string(t) + ", client " + std::to_string(id) +
                              " failed: " + e.what();
            }
        }
        if (!failure.empty()) throw numeric_error(failure);

        std::size_t total = 0;
        for (std::uint32_t id : selected) total += shards[id].size();
        std::vector<double> lambda(selected.size());
        for (std::size_t s = 0; s < selected.size(); ++s)
            lambda[s] = static_cast<double>(shards[selected[s]].size()) /
                        static_cast<double>(total);

        const ParamVector aggregated = aggregate(locals, lambda);
        global.set_params(aggregated);

        const Metrics m = evaluate(global, test_data, Loss::softmax_ce);
        RoundRecord rec;
        rec.round = t;
        rec.test_loss = m.loss;
        rec.test_acc = *m.accuracy;
        rec.lr = lr;
        report.rounds.push_back(rec);

        if (observer) {
            RoundState st;
            st.round = t;
            st.global_before = w_g;
            st.global_after = aggregated;
            st.mask = masked ? &mask : nullptr;
            st.selected = selected;
            st.lambdas = lambda;
            st.lr = lr;
            st.test_metrics = m;
            observer(st);
        }
        lr *= cfg.lr_decay_per_round;
    }

    const std::size_t tail = std::min<std::size_t>(5, report.rounds.size());
    double acc = 0.0;
    for (std::size_t i = report.rounds.size() - tail; i < report.rounds.size(); ++i)
        acc += report.rounds[i].test_acc;
    report.final_accuracy = acc / static_cast<double>(tail);
    return report;
}

std::string fed_report_csv(const FederatedRunReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "round,test_loss,test_acc,lr\n";
    for (const RoundRecord& r : report.rounds)
        out << r.round << "," << r.test_loss << "," << r.test_acc << "," << r.lr << "\n";
    return out.str();
}

std::string method_name(FedMethod m) {
    switch (m) {
        case FedMethod::fedavg: return "fedavg";
        case FedMethod::fedpfn: return "fedpfn";
        case FedMethod::fedpnu: return "fedpnu";
    }
    return "fedavg";
}

FedMethod method_from_name(const std::string& name) {
    if (name == "fedavg") return FedMethod::fedavg;
    if (name == "fedpfn") return FedMethod::fedpfn;
    if (name == "fedpnu") return FedMethod::fedpnu;
    throw config_error("unknown federated method: " + name);
}

}  // namespace tna
