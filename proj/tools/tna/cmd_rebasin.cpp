#include <cstdio>
#include <filesystem>

#include "common.hpp"
#include "tna/connect.hpp"
#include "tna/perm.hpp"
#include "tna/runtime.hpp"

namespace tna::cli {

int run_rebasin(const RebasinArgs& args) {
    ConfigDoc cfg = load_config(args.config_path, args.seed_overrides);
    validate_config(cfg.doc);
    if (args.threads > 0) set_threads(args.threads);

    const NetworkSpec spec = model_from_config(cfg);
    const DataBundle data = load_data(cfg);

    std::size_t grid_size = default_alpha_grid_size();
    std::string eval_split = "train";
    if (cfg.doc.contains("lmc")) {
        const nlohmann::json& l = cfg.doc["lmc"];
        grid_size = static_cast<std::size_t>(
            opt_int(l, "grid_size", static_cast<std::int64_t>(grid_size), "lmc"));
        eval_split = opt_str(l, "eval", eval_split, "lmc");
    }
    if (eval_split == "test" && !data.has_test)
        throw config_error("lmc.eval is \"test\" but the data source has no test split");
    const Dataset& eval_data = eval_split == "test" ? data.test : data.train;
    const Loss loss =
        spec.output_head == OutputHead::softmax_ce_logits ? Loss::softmax_ce : Loss::mse;

    std::string path_a = args.ckpt_a;
    std::string path_b = args.ckpt_b;
    if (!args.run_dir.empty()) {
        path_a = (std::filesystem::path(args.run_dir) / "model_a.bin").string();
        path_b = (std::filesystem::path(args.run_dir) / "model_b.bin").string();
    }
    if (path_a.empty() || path_b.empty())
        throw config_error("rebasin needs --run-dir or both --checkpoint-a and --checkpoint-b");
    const LayeredNetwork net_a = load_checkpoint(path_a, spec);
    const LayeredNetwork net_b = load_checkpoint(path_b, spec);

    prepare_out_dir(args);

    const InterpolationProfile pre =
        sweep(spec, net_a.to_params(), net_b.to_params(), eval_data, grid_size, loss);
    const BarrierReport pre_report = barrier_report(pre);

    nlohmann::json out;
    stamp_artifact(out, cfg);
    out["command"] = "rebasin";
    out["method"] = args.method;
    out["checkpoints"] = {{"a", path_a}, {"b", path_b}};
    out["pre"] = barrier_json(pre_report);

    std::vector<std::string> outputs = {"rebasin.json", "profile_pre.csv"};
    write_text(out_path(args, "profile_pre.csv"), csv_artifact(profile_csv(pre), cfg));

    const bool do_wm = args.method == "wm" || args.method == "both";
    const bool do_sa = args.method == "sa" || args.method == "both";

    if (do_wm) {
        const WeightMatchResult wm =
            weight_match(net_a, net_b, args.wm_max_sweeps, args.wm_seed);
        const LayeredNetwork matched = apply_permutation(net_b, wm.perm);
        const InterpolationProfile post =
            sweep(spec, net_a.to_params(), matched.to_params(), eval_data, grid_size, loss);
        out["wm"] = {{"sweeps_used", wm.sweeps_used},
                     {"objective", wm.objective},
                     {"seed", args.wm_seed},
                     {"max_sweeps", args.wm_max_sweeps},
                     {"post", barrier_json(barrier_report(post))}};
        write_text(out_path(args, "profile_wm.csv"), csv_artifact(profile_csv(post), cfg));
        write_text(out_path(args, "perm_wm.json"), permutation_to_json(wm.perm) + "\n");
        outputs.push_back("profile_wm.csv");
        outputs.push_back("perm_wm.json");
    }

    if (do_sa) {
        const SaMatchResult sa = simulated_annealing_match(
            net_a, net_b, eval_data, args.sa_iterations, SaSchedule{}, args.sa_seed, loss);
        const LayeredNetwork matched = apply_permutation(net_b, sa.perm);
        const InterpolationProfile post =
            sweep(spec, net_a.to_params(), matched.to_params(), eval_data, grid_size, loss);
        out["sa"] = {{"iterations", args.sa_iterations},
                     {"seed", args.sa_seed},
                     {"initial_midpoint_loss", sa.initial_loss},
                     {"final_midpoint_loss", sa.trace.empty() ? sa.initial_loss
                                                              : sa.trace.back()},
                     {"post", barrier_json(barrier_report(post))}};
        write_text(out_path(args, "profile_sa.csv"), csv_artifact(profile_csv(post), cfg));
        write_text(out_path(args, "perm_sa.json"), permutation_to_json(sa.perm) + "\n");
        outputs.push_back("profile_sa.csv");
        outputs.push_back("perm_sa.json");
    }

    write_text(out_path(args, "rebasin.json"), out.dump(2) + "\n");
    write_run_manifest(args, cfg, "rebasin", outputs);

    std::printf("rebasin: pre loss_barrier=%.6g", pre_report.loss_barrier);
    if (do_wm)
        std::printf(" | wm post=%.6g sweeps=%d", out["wm"]["post"]["loss_barrier"].get<double>(),
                    out["wm"]["sweeps_used"].get<int>());
    if (do_sa)
        std::printf(" | sa post=%.6g iters=%d", out["sa"]["post"]["loss_barrier"].get<double>(),
                    args.sa_iterations);
    std::printf("\n");
    return 0;
}

}  // namespace tna::cli
