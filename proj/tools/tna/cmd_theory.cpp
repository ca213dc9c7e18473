#include <cstdio>

#include "common.hpp"
#include "tna/runtime.hpp"

namespace tna::cli {

int run_theory(const CommonArgs& args) {
    ConfigDoc cfg = load_config(args.config_path, args.seed_overrides);
    validate_config(cfg.doc);
    if (args.threads > 0) set_threads(args.threads);

    const TheoryPlan plan = theory_from_config(cfg);
    prepare_out_dir(args);

    const BoundCheckReport report =
        bound_check(plan.cfg, plan.trials, plan.seed, plan.mono_trials);

    nlohmann::json out = nlohmann::json::parse(bound_check_to_json(report));
    stamp_artifact(out, cfg);
    out["command"] = "theory";

    write_text(out_path(args, "theory.json"), out.dump(2) + "\n");
    write_run_manifest(args, cfg, "theory", {"theory.json"});

    std::printf("theory: trials=%d violation_rates z=%.4f d1=%.4f d2=%.4f joint=%.4f "
                "spearman=%.3f\n",
                report.trials, report.rate_z, report.rate_d1, report.rate_d2, report.rate_joint,
                report.monotonicity.spearman);
    return 0;
}

}  // namespace tna::cli
