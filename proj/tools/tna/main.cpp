// tna: workbench for training-time neuron alignment experiments.
//
// Subcommands: lmc, rebasin, fed, theory, data.
// Exit codes: 0 success, 1 config error, 2 data error, 3 numeric error.

#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "common.hpp"
#include "tna/errors.hpp"

namespace {

void add_common_flags(CLI::App* cmd, tna::cli::CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "Output directory for artifacts")->required();
    cmd->add_option("--threads", args.threads,
                    "Cap the OpenMP thread count (0 keeps the default); results are "
                    "identical for every setting");
    cmd->add_option("--seed-override", args.seed_overrides,
                    "Override a config seed, e.g. train.seed_a=7 (repeatable)");
}

void print_error(const char* kind, const std::string& message) {
    nlohmann::json j;
    j["error"] = kind;
    j["message"] = message;
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workbench for training-time neuron alignment: linear mode "
                 "connectivity, permutation matching, federated simulation, and "
                 "Monte Carlo bound checks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tna::cli::kToolVersion);
    app.footer("Dataset cache: --cache / $TNA_DATA_CACHE, default data/cache.\n"
               "Exit codes: 0 success, 1 config error, 2 data error, 3 numeric error.");

    tna::cli::CommonArgs lmc_args;
    CLI::App* lmc = app.add_subcommand(
        "lmc", "Train two replicas from a shared init and measure the interpolation barrier");
    add_common_flags(lmc, lmc_args);

    tna::cli::RebasinArgs rb_args;
    CLI::App* rb = app.add_subcommand(
        "rebasin", "Align two checkpoints by weight matching and/or simulated annealing");
    add_common_flags(rb, rb_args);
    rb->add_option("--run-dir", rb_args.run_dir,
                   "An lmc output directory providing model_a.bin and model_b.bin");
    rb->add_option("--checkpoint-a", rb_args.ckpt_a, "First checkpoint file");
    rb->add_option("--checkpoint-b", rb_args.ckpt_b, "Second checkpoint file");
    rb->add_option("--method", rb_args.method, "wm, sa, or both (default both)")
        ->check(CLI::IsMember({"wm", "sa", "both"}));
    rb->add_option("--wm-max-sweeps", rb_args.wm_max_sweeps,
                   "Weight matching sweep cap (default 300)");
    rb->add_option("--sa-iterations", rb_args.sa_iterations,
                   "Simulated annealing iterations (default 2000)");
    rb->add_option("--wm-seed", rb_args.wm_seed, "Weight matching layer-order seed");
    rb->add_option("--sa-seed", rb_args.sa_seed, "Simulated annealing seed");

    tna::cli::CommonArgs fed_args;
    CLI::App* fed = app.add_subcommand("fed", "Run the federated simulator");
    add_common_flags(fed, fed_args);

    tna::cli::CommonArgs th_args;
    CLI::App* th = app.add_subcommand("theory", "Monte Carlo check of the layer bounds");
    add_common_flags(th, th_args);

    CLI::App* data = app.add_subcommand("data", "Dataset cache management");
    data->require_subcommand(1);

    tna::cli::FetchArgs fetch_args;
    CLI::App* fetch = data->add_subcommand(
        "fetch", "Download and verify dataset files listed in the manifest");
    fetch->add_option("--manifest", fetch_args.manifest_path,
                      "Manifest path (default data/manifest.json)");
    fetch->add_option("--cache", fetch_args.cache_dir,
                      "Cache directory (default $TNA_DATA_CACHE or data/cache)");
    fetch->add_option("datasets", fetch_args.datasets,
                      "Dataset names to fetch (default: all in the manifest)");

    tna::cli::InspectArgs inspect_args;
    CLI::App* inspect = data->add_subcommand("inspect", "Print the header of a data file");
    inspect->add_option("file", inspect_args.path, "IDX (gzip or raw) or CIFAR binary file")
        ->required();
    inspect->add_flag("--cifar", inspect_args.cifar, "Treat the file as a CIFAR-10 batch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : tna::cli::kExitConfig;
    }

    try {
        if (lmc->parsed()) return tna::cli::run_lmc(lmc_args);
        if (rb->parsed()) return tna::cli::run_rebasin(rb_args);
        if (fed->parsed()) return tna::cli::run_fed(fed_args);
        if (th->parsed()) return tna::cli::run_theory(th_args);
        if (data->parsed()) {
            if (fetch->parsed()) return tna::cli::run_data_fetch(fetch_args);
            if (inspect->parsed()) return tna::cli::run_data_inspect(inspect_args);
        }
        print_error("config", "no subcommand given");
        return tna::cli::kExitConfig;
    } catch (const tna::config_error& e) {
        print_error("config", e.what());
        return tna::cli::kExitConfig;
    } catch (const tna::data_error& e) {
        print_error("data", e.what());
        return tna::cli::kExitData;
    } catch (const tna::io_error& e) {
        print_error("data", e.what());
        return tna::cli::kExitData;
    } catch (const tna::numeric_error& e) {
        print_error("numeric", e.what());
        return tna::cli::kExitNumeric;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return tna::cli::kExitNumeric;
    }
}
