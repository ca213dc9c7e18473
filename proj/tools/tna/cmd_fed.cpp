#include <cstdio>

#include "common.hpp"
#include "tna/runtime.hpp"

namespace tna::cli {

int run_fed(const CommonArgs& args) {
    ConfigDoc cfg = load_config(args.config_path, args.seed_overrides);
    validate_config(cfg.doc);
    if (args.threads > 0) set_threads(args.threads);

    const NetworkSpec spec = model_from_config(cfg);
    const DataBundle data = load_data(cfg);
    if (!data.has_test)
        throw config_error("fed requires a data source with a test split");
    const FederatedConfig fc = fed_from_config(cfg, spec);

    prepare_out_dir(args);
    const FederatedRunReport report = run_federated(fc, data.train, data.test);

    nlohmann::json out;
    stamp_artifact(out, cfg);
    out["command"] = "fed";
    out["method"] = method_name(fc.method);
    out["n_clients"] = fc.n_clients;
    out["rounds"] = fc.rounds;
    out["local_epochs"] = fc.local_epochs;
    out["mask_ratio"] = fc.mask_ratio;
    out["dir"] = fc.dir;
    out["selection_ratio"] = fc.selection_ratio;
    out["lr0"] = fc.lr0;
    out["lr_decay_per_round"] = fc.lr_decay_per_round;
    out["batch_size"] = fc.batch_size;
    out["momentum"] = fc.momentum;
    out["weight_decay"] = fc.weight_decay;
    out["seeds"] = {{"partition", fc.seeds.partition},
                    {"masks", fc.seeds.masks},
                    {"selection", fc.seeds.selection},
                    {"training", fc.seeds.training}};
    out["final_accuracy"] = report.final_accuracy;
    std::vector<std::size_t> client_sizes;
    for (const auto& a : report.partition.assignment) client_sizes.push_back(a.size());
    out["client_sizes"] = client_sizes;
    out["class_histogram"] = report.partition.class_histogram;

    write_text(out_path(args, "fed.json"), out.dump(2) + "\n");
    write_text(out_path(args, "fed_report.csv"), csv_artifact(fed_report_csv(report), cfg));
    write_run_manifest(args, cfg, "fed", {"fed.json", "fed_report.csv"});

    std::printf("fed: method=%s rounds=%d final_accuracy=%.4f\n", method_name(fc.method).c_str(),
                fc.rounds, report.final_accuracy);
    return 0;
}

}  // namespace tna::cli
