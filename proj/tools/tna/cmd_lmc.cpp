#include <cstdio>

#include "common.hpp"
#include "tna/connect.hpp"
#include "tna/runtime.hpp"

namespace tna::cli {

int run_lmc(const CommonArgs& args) {
    ConfigDoc cfg = load_config(args.config_path, args.seed_overrides);
    validate_config(cfg.doc);
    if (args.threads > 0) set_threads(args.threads);

    const NetworkSpec spec = model_from_config(cfg);
    const DataBundle data = load_data(cfg);
    const TrainPlan plan = train_plan_from_config(cfg, spec);
    const MaskPlan mask_plan = mask_plan_from_config(cfg);

    std::size_t grid_size = default_alpha_grid_size();
    std::string eval_split = "train";
    if (cfg.doc.contains("lmc")) {
        const nlohmann::json& l = cfg.doc["lmc"];
        grid_size = static_cast<std::size_t>(
            opt_int(l, "grid_size", static_cast<std::int64_t>(grid_size), "lmc"));
        eval_split = opt_str(l, "eval", eval_split, "lmc");
    }
    if (eval_split != "train" && eval_split != "test")
        throw config_error("lmc.eval must be \"train\" or \"test\"");
    if (eval_split == "test" && !data.has_test)
        throw config_error("lmc.eval is \"test\" but data source \"" + data.source +
                           "\" has no test split");

    prepare_out_dir(args);

    // Shared initialization; the replicas differ only in their shuffle seeds.
    LayeredNetwork init = build_network(spec);
    GradientMask mask;
    const GradientMask* mask_ptr = nullptr;
    if (mask_plan.mode == MaskPlan::Mode::tna_pfn) {
        mask = sample_mask(spec, mask_plan.ratio, mask_plan.seed);
        mask_ptr = &mask;
    } else if (mask_plan.mode == MaskPlan::Mode::prune) {
        mask = prune_at_init(init, mask_plan.ratio, mask_plan.seed);
        mask_ptr = &mask;
    }

    LayeredNetwork net_a = init;
    OptimizerState state_a(spec.param_count(), plan.lr, plan.momentum, plan.weight_decay);
    const std::vector<Metrics> hist_a = train(net_a, data.train, plan.epochs, plan.batch_size,
                                              state_a, mask_ptr, plan.seed_a, plan.loss);

    LayeredNetwork net_b = init;
    OptimizerState state_b(spec.param_count(), plan.lr, plan.momentum, plan.weight_decay);
    const std::vector<Metrics> hist_b = train(net_b, data.train, plan.epochs, plan.batch_size,
                                              state_b, mask_ptr, plan.seed_b, plan.loss);

    const Dataset& eval_data = eval_split == "test" ? data.test : data.train;
    const InterpolationProfile profile =
        sweep(spec, net_a.to_params(), net_b.to_params(), eval_data, grid_size, plan.loss);
    const BarrierReport report = barrier_report(profile);

    nlohmann::json out;
    stamp_artifact(out, cfg);
    out["command"] = "lmc";
    out["barrier"] = barrier_json(report);
    out["eval_split"] = eval_split;
    out["endpoints"] = {{"a", metrics_json(profile.endpoint_w1)},
                        {"b", metrics_json(profile.endpoint_w2)}};
    out["final_train"] = {{"a", metrics_json(hist_a.back())},
                          {"b", metrics_json(hist_b.back())}};
    out["mask"] = {{"mode", mask_plan.mode == MaskPlan::Mode::none
                                ? "none"
                                : (mask_plan.mode == MaskPlan::Mode::tna_pfn ? "tna_pfn"
                                                                             : "prune")},
                   {"ratio", mask_plan.ratio},
                   {"seed", mask_plan.seed},
                   {"observed_ratio",
                    mask_ptr ? nlohmann::json(mask.observed_ratio()) : nlohmann::json()}};

    std::vector<std::string> outputs = {"config.json", "profile.csv", "barrier.json",
                                        "model_a.bin", "model_b.bin"};
    write_text(out_path(args, "config.json"), cfg.doc.dump(2) + "\n");
    write_text(out_path(args, "profile.csv"), csv_artifact(profile_csv(profile), cfg));
    write_text(out_path(args, "barrier.json"), out.dump(2) + "\n");
    save_checkpoint(out_path(args, "model_a.bin"), net_a);
    save_checkpoint(out_path(args, "model_b.bin"), net_b);
    if (mask_ptr) {
        save_mask(mask, spec, out_path(args, "mask.bin"));
        outputs.push_back("mask.bin");
    }
    write_run_manifest(args, cfg, "lmc", outputs);

    if (report.acc_barrier)
        std::printf("lmc: loss_barrier=%.6g (alpha=%.4f) acc_barrier=%.6g (alpha=%.4f)\n",
                    report.loss_barrier, report.loss_barrier_alpha, *report.acc_barrier,
                    report.acc_barrier_alpha);
    else
        std::printf("lmc: loss_barrier=%.6g (alpha=%.4f)\n", report.loss_barrier,
                    report.loss_barrier_alpha);
    return 0;
}

}  // namespace tna::cli
