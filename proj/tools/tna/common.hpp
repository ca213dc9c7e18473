#pragma once

// Shared plumbing for the tna command-line tool: config loading with schema
// validation, seed overrides, config hashing, artifact and run-manifest
// emission, and binary checkpoints.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tna/connect.hpp"
#include "tna/data.hpp"
#include "tna/errors.hpp"
#include "tna/fedsim.hpp"
#include "tna/io.hpp"
#include "tna/mask.hpp"
#include "tna/nn.hpp"
#include "tna/theory.hpp"

namespace tna::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 success, 1 config error, 2 data error, 3 numeric error.
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int threads = 0;  // 0 = leave the OpenMP default
    std::vector<std::string> seed_overrides;
};

struct RebasinArgs : CommonArgs {
    std::string run_dir;  // an lmc output directory holding model_{a,b}.bin
    std::string ckpt_a;
    std::string ckpt_b;
    std::string method = "both";  // wm | sa | both
    int wm_max_sweeps = 300;
    int sa_iterations = 2000;
    std::uint64_t wm_seed = 1;
    std::uint64_t sa_seed = 1;
};

struct FetchArgs {
    std::string manifest_path = "data/manifest.json";
    std::string cache_dir;  // empty = default_cache_dir()
    std::vector<std::string> datasets;
};

struct InspectArgs {
    std::string path;
    bool cifar = false;
};

int run_lmc(const CommonArgs& args);
int run_rebasin(const RebasinArgs& args);
int run_fed(const CommonArgs& args);
int run_theory(const CommonArgs& args);
int run_data_fetch(const FetchArgs& args);
int run_data_inspect(const InspectArgs& args);

// ---------------------------------------------------------------------------
// Config documents

struct ConfigDoc {
    nlohmann::json doc;
    std::string hash;  // sha256 of the canonical dump after overrides
    std::string path;
};

inline std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) throw config_error("");
        return v;
    } catch (const std::exception&) {
        throw config_error("expected an unsigned integer for " + what + ", got \"" + text + "\"");
    }
}

// K=V with K a dotted path into the document; intermediate objects are
// created as needed.
inline void apply_seed_override(nlohmann::json& doc, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw config_error("seed override must look like section.key=VALUE, got \"" + spec + "\"");
    const std::uint64_t value = parse_u64(spec.substr(eq + 1), "seed override " + spec);
    nlohmann::json* node = &doc;
    std::string path = spec.substr(0, eq);
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw config_error("empty key in seed override \"" + spec + "\"");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = nlohmann::json::object();
        node = &(*node)[key];
        if (!node->is_object())
            throw config_error("seed override path " + path + " crosses a non-object");
        start = dot + 1;
    }
}

inline ConfigDoc load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
    if (path.empty()) throw config_error("--config is required");
    ConfigDoc cfg;
    cfg.path = path;
    const std::vector<std::uint8_t> bytes = read_file(path);
    try {
        cfg.doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const std::exception& e) {
        throw config_error("config " + path + ": " + e.what());
    }
    if (!cfg.doc.is_object()) throw config_error("config must be a JSON object");
    for (const std::string& o : overrides) apply_seed_override(cfg.doc, o);
    const std::string canonical = cfg.doc.dump();
    cfg.hash = sha256_hex(canonical.data(), canonical.size());
    return cfg;
}

// ---------------------------------------------------------------------------
// Schema

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& ctx) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw config_error("unknown key \"" + item.key() + "\" in " + ctx);
}

inline const nlohmann::json& section(const nlohmann::json& doc, const std::string& name) {
    if (!doc.contains(name))
        throw config_error("config is missing the \"" + name + "\" section");
    if (!doc[name].is_object())
        throw config_error("config section \"" + name + "\" must be an object");
    return doc[name];
}

inline double req_num(const nlohmann::json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.contains(key)) throw config_error("missing " + ctx + "." + key);
    if (!obj[key].is_number()) throw config_error(ctx + "." + key + " must be a number");
    return obj[key].get<double>();
}

inline double opt_num(const nlohmann::json& obj, const std::string& key, double def,
                      const std::string& ctx) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number()) throw config_error(ctx + "." + key + " must be a number");
    return obj[key].get<double>();
}

inline std::int64_t req_int(const nlohmann::json& obj, const std::string& key,
                            const std::string& ctx) {
    if (!obj.contains(key)) throw config_error("missing " + ctx + "." + key);
    if (!obj[key].is_number_integer()) throw config_error(ctx + "." + key + " must be an integer");
    return obj[key].get<std::int64_t>();
}

inline std::int64_t opt_int(const nlohmann::json& obj, const std::string& key, std::int64_t def,
                            const std::string& ctx) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number_integer()) throw config_error(ctx + "." + key + " must be an integer");
    return obj[key].get<std::int64_t>();
}

inline std::uint64_t req_seed(const nlohmann::json& obj, const std::string& key,
                              const std::string& ctx) {
    if (!obj.contains(key)) throw config_error("missing " + ctx + "." + key +
                                               " (all seeds must be explicit)");
    if (!obj[key].is_number_unsigned() && !obj[key].is_number_integer())
        throw config_error(ctx + "." + key + " must be an unsigned integer");
    const std::int64_t raw = obj[key].get<std::int64_t>();
    if (obj[key].is_number_integer() && !obj[key].is_number_unsigned() && raw < 0)
        throw config_error(ctx + "." + key + " must be nonnegative");
    return obj[key].get<std::uint64_t>();
}

inline std::string req_str(const nlohmann::json& obj, const std::string& key,
                           const std::string& ctx) {
    if (!obj.contains(key)) throw config_error("missing " + ctx + "." + key);
    if (!obj[key].is_string()) throw config_error(ctx + "." + key + " must be a string");
    return obj[key].get<std::string>();
}

inline std::string opt_str(const nlohmann::json& obj, const std::string& key,
                           const std::string& def, const std::string& ctx) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_string()) throw config_error(ctx + "." + key + " must be a string");
    return obj[key].get<std::string>();
}

// Full schema check: known sections only, known keys only.  Required keys
// are enforced by the builders so that each subcommand only demands the
// sections it actually uses.
inline void validate_config(const nlohmann::json& doc) {
    check_keys(doc, {"model", "data", "train", "mask", "lmc", "fed", "theory"}, "config");
    if (doc.contains("model"))
        check_keys(doc["model"], {"layer_widths", "activation", "output_head", "init_seed"},
                   "model");
    if (doc.contains("data"))
        check_keys(doc["data"],
                   {"source", "n", "noise_std", "seed", "n_classes", "n_per_class",
                    "test_per_class", "dim", "separation", "normalize", "cache_dir"},
                   "data");
    if (doc.contains("train"))
        check_keys(doc["train"],
                   {"epochs", "batch_size", "lr", "momentum", "weight_decay", "seed_a",
                    "seed_b"},
                   "train");
    if (doc.contains("mask")) check_keys(doc["mask"], {"mode", "ratio", "seed"}, "mask");
    if (doc.contains("lmc")) check_keys(doc["lmc"], {"grid_size", "eval"}, "lmc");
    if (doc.contains("fed")) {
        check_keys(doc["fed"],
                   {"n_clients", "rounds", "local_epochs", "method", "mask_ratio", "dir",
                    "selection_ratio", "lr0", "lr_decay_per_round", "batch_size", "momentum",
                    "weight_decay", "seeds"},
                   "fed");
        if (doc["fed"].contains("seeds"))
            check_keys(doc["fed"]["seeds"], {"partition", "masks", "selection", "training"},
                       "fed.seeds");
    }
    if (doc.contains("theory"))
        check_keys(doc["theory"],
                   {"h", "d", "b", "sigma_v", "sigma_U", "rho_v", "rho_U", "delta", "n_x",
                    "alpha_grid_size", "trials", "seed", "mono_trials"},
                   "theory");
}

// ---------------------------------------------------------------------------
// Builders

inline NetworkSpec model_from_config(const ConfigDoc& cfg) {
    const nlohmann::json& m = section(cfg.doc, "model");
    NetworkSpec spec;
    if (!m.contains("layer_widths") || !m["layer_widths"].is_array())
        throw config_error("model.layer_widths must be an array");
    for (const auto& w : m["layer_widths"]) {
        if (!w.is_number_integer() || w.get<std::int64_t>() < 1)
            throw config_error("model.layer_widths entries must be positive integers");
        spec.layer_widths.push_back(w.get<std::size_t>());
    }
    const std::string act = opt_str(m, "activation", "relu", "model");
    if (act != "relu") throw config_error("model.activation must be \"relu\"");
    const std::string head = req_str(m, "output_head", "model");
    if (head == "linear") spec.output_head = OutputHead::linear;
    else if (head == "softmax") spec.output_head = OutputHead::softmax_ce_logits;
    else throw config_error("model.output_head must be \"linear\" or \"softmax\"");
    spec.init_seed = req_seed(m, "init_seed", "model");
    spec.validate();
    return spec;
}

struct DataBundle {
    Dataset train;
    Dataset test;
    bool has_test = false;
    std::string source;
};

inline std::string resolve_cache_file(const std::string& cache_dir, const std::string& rel) {
    namespace fs = std::filesystem;
    const fs::path gz = fs::path(cache_dir) / (rel + ".gz");
    if (fs::exists(gz)) return gz.string();
    const fs::path raw = fs::path(cache_dir) / rel;
    if (fs::exists(raw)) return raw.string();
    throw io_error("dataset file not found: " + gz.string() + " (or uncompressed " +
                   raw.string() + "); populate the cache with `tna data fetch`");
}

inline Dataset concat_datasets(const std::vector<Dataset>& parts) {
    if (parts.empty()) throw data_error("concat: no parts");
    Dataset out;
    std::size_t rows = 0;
    for (const Dataset& p : parts) rows += p.size();
    out.inputs.resize(rows, parts[0].inputs.cols);
    out.labels.reserve(rows);
    std::size_t at = 0;
    for (const Dataset& p : parts) {
        std::copy(p.inputs.data.begin(), p.inputs.data.end(),
                  out.inputs.data.begin() + at * out.inputs.cols);
        out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
        at += p.size();
    }
    return out;
}

inline DataBundle load_data(const ConfigDoc& cfg) {
    const nlohmann::json& d = section(cfg.doc, "data");
    DataBundle bundle;
    bundle.source = req_str(d, "source", "data");
    const std::string& src = bundle.source;

    if (src == "poly2" || src == "poly3") {
        const std::size_t n = static_cast<std::size_t>(opt_int(d, "n", 100, "data"));
        const double noise = opt_num(d, "noise_std", 0.05, "data");
        const std::uint64_t seed = req_seed(d, "seed", "data");
        bundle.train = gen_polynomial(src == "poly2" ? PolyKind::poly2 : PolyKind::poly3, n,
                                      noise, seed);
    } else if (src == "blobs") {
        const std::size_t n_classes =
            static_cast<std::size_t>(opt_int(d, "n_classes", 10, "data"));
        const std::size_t per = static_cast<std::size_t>(opt_int(d, "n_per_class", 100, "data"));
        const std::size_t test_per = static_cast<std::size_t>(
            opt_int(d, "test_per_class", std::max<std::int64_t>(1, per / 5), "data"));
        const std::size_t dim = static_cast<std::size_t>(opt_int(d, "dim", 20, "data"));
        const double sep = opt_num(d, "separation", 3.0, "data");
        const std::uint64_t seed = req_seed(d, "seed", "data");
        // One draw with shared centers, split class-by-class into train/test.
        const Dataset all = gen_blobs(n_classes, per + test_per, dim, sep, seed);
        std::vector<std::uint32_t> tr, te;
        for (std::size_t c = 0; c < n_classes; ++c) {
            const std::size_t base = c * (per + test_per);
            for (std::size_t i = 0; i < per; ++i) tr.push_back(std::uint32_t(base + i));
            for (std::size_t i = 0; i < test_per; ++i)
                te.push_back(std::uint32_t(base + per + i));
        }
        bundle.train = all.subset(tr);
        bundle.test = all.subset(te);
        bundle.has_test = true;
    } else if (src == "mnist" || src == "fashion_mnist") {
        const std::string cache = opt_str(d, "cache_dir", default_cache_dir(), "data");
        bundle.train = load_idx_pair(
            resolve_cache_file(cache, src + "/train-images-idx3-ubyte"),
            resolve_cache_file(cache, src + "/train-labels-idx1-ubyte"));
        bundle.test = load_idx_pair(
            resolve_cache_file(cache, src + "/t10k-images-idx3-ubyte"),
            resolve_cache_file(cache, src + "/t10k-labels-idx1-ubyte"));
        bundle.has_test = true;
    } else if (src == "cifar10") {
        const std::string cache = opt_str(d, "cache_dir", default_cache_dir(), "data");
        std::vector<Dataset> parts;
        for (int b = 1; b <= 5; ++b)
            parts.push_back(parse_cifar10_bin(read_file(resolve_cache_file(
                cache, "cifar10/cifar-10-batches-bin/data_batch_" + std::to_string(b) +
                           ".bin"))));
        bundle.train = concat_datasets(parts);
        bundle.test = parse_cifar10_bin(
            read_file(resolve_cache_file(cache, "cifar10/cifar-10-batches-bin/test_batch.bin")));
        bundle.has_test = true;
    } else {
        throw config_error("data.source must be one of poly2, poly3, blobs, mnist, "
                           "fashion_mnist, cifar10");
    }

    const bool image_source = src == "mnist" || src == "fashion_mnist" || src == "cifar10";
    const std::string norm = opt_str(d, "normalize", image_source ? "unit_scale" : "none",
                                     "data");
    if (norm == "unit_scale") {
        bundle.train = normalize(bundle.train, NormScheme::unit_scale);
        if (bundle.has_test) bundle.test = normalize(bundle.test, NormScheme::unit_scale);
    } else if (norm == "standardize") {
        const FeatureStats stats = standardize_fit(bundle.train);
        bundle.train = standardize_apply(bundle.train, stats);
        if (bundle.has_test) bundle.test = standardize_apply(bundle.test, stats);
    } else if (norm != "none") {
        throw config_error("data.normalize must be none, unit_scale, or standardize");
    }
    return bundle;
}

struct TrainPlan {
    int epochs = 1;
    int batch_size = 32;
    double lr = 0.1;
    double momentum = 0.0;
    double weight_decay = 0.0;
    std::uint64_t seed_a = 0;
    std::uint64_t seed_b = 0;
    Loss loss = Loss::mse;
};

inline TrainPlan train_plan_from_config(const ConfigDoc& cfg, const NetworkSpec& spec) {
    const nlohmann::json& t = section(cfg.doc, "train");
    TrainPlan plan;
    plan.epochs = static_cast<int>(req_int(t, "epochs", "train"));
    plan.batch_size = static_cast<int>(req_int(t, "batch_size", "train"));
    plan.lr = req_num(t, "lr", "train");
    plan.momentum = opt_num(t, "momentum", 0.0, "train");
    plan.weight_decay = opt_num(t, "weight_decay", 0.0, "train");
    plan.seed_a = req_seed(t, "seed_a", "train");
    plan.seed_b = req_seed(t, "seed_b", "train");
    plan.loss = spec.output_head == OutputHead::softmax_ce_logits ? Loss::softmax_ce : Loss::mse;
    if (plan.epochs < 1) throw config_error("train.epochs must be >= 1");
    if (plan.batch_size < 1) throw config_error("train.batch_size must be >= 1");
    return plan;
}

struct MaskPlan {
    enum class Mode { none, tna_pfn, prune };
    Mode mode = Mode::none;
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

inline MaskPlan mask_plan_from_config(const ConfigDoc& cfg) {
    MaskPlan plan;
    if (!cfg.doc.contains("mask")) return plan;
    const nlohmann::json& m = cfg.doc["mask"];
    const std::string mode = req_str(m, "mode", "mask");
    if (mode == "none") return plan;
    if (mode == "tna_pfn") plan.mode = MaskPlan::Mode::tna_pfn;
    else if (mode == "prune") plan.mode = MaskPlan::Mode::prune;
    else throw config_error("mask.mode must be none, tna_pfn, or prune");
    plan.ratio = req_num(m, "ratio", "mask");
    plan.seed = req_seed(m, "seed", "mask");
    return plan;
}

inline FederatedConfig fed_from_config(const ConfigDoc& cfg, const NetworkSpec& spec) {
    const nlohmann::json& f = section(cfg.doc, "fed");
    FederatedConfig fc;
    fc.model = spec;
    fc.n_clients = static_cast<int>(opt_int(f, "n_clients", fc.n_clients, "fed"));
    fc.rounds = static_cast<int>(opt_int(f, "rounds", fc.rounds, "fed"));
    fc.local_epochs = static_cast<int>(opt_int(f, "local_epochs", fc.local_epochs, "fed"));
    fc.method = method_from_name(req_str(f, "method", "fed"));
    fc.mask_ratio = opt_num(f, "mask_ratio", fc.mask_ratio, "fed");
    fc.dir = opt_num(f, "dir", fc.dir, "fed");
    fc.selection_ratio = opt_num(f, "selection_ratio", fc.selection_ratio, "fed");
    fc.lr0 = opt_num(f, "lr0", fc.lr0, "fed");
    fc.lr_decay_per_round = opt_num(f, "lr_decay_per_round", fc.lr_decay_per_round, "fed");
    fc.batch_size = static_cast<int>(opt_int(f, "batch_size", fc.batch_size, "fed"));
    fc.momentum = opt_num(f, "momentum", fc.momentum, "fed");
    fc.weight_decay = opt_num(f, "weight_decay", fc.weight_decay, "fed");
    if (!f.contains("seeds") || !f["seeds"].is_object())
        throw config_error("missing fed.seeds (all seeds must be explicit)");
    const nlohmann::json& s = f["seeds"];
    fc.seeds.partition = req_seed(s, "partition", "fed.seeds");
    fc.seeds.masks = req_seed(s, "masks", "fed.seeds");
    fc.seeds.selection = req_seed(s, "selection", "fed.seeds");
    fc.seeds.training = req_seed(s, "training", "fed.seeds");
    fc.validate();
    return fc;
}

struct TheoryPlan {
    TheoryConfig cfg;
    int trials = 200;
    int mono_trials = 50;
    std::uint64_t seed = 0;
};

inline TheoryPlan theory_from_config(const ConfigDoc& cfg) {
    const nlohmann::json& t = section(cfg.doc, "theory");
    TheoryPlan plan;
    plan.cfg.h = static_cast<std::size_t>(opt_int(t, "h", plan.cfg.h, "theory"));
    plan.cfg.d = static_cast<std::size_t>(opt_int(t, "d", plan.cfg.d, "theory"));
    plan.cfg.b = opt_num(t, "b", plan.cfg.b, "theory");
    plan.cfg.sigma_v = opt_num(t, "sigma_v", plan.cfg.sigma_v, "theory");
    plan.cfg.sigma_U = opt_num(t, "sigma_U", plan.cfg.sigma_U, "theory");
    plan.cfg.rho_v = opt_num(t, "rho_v", plan.cfg.rho_v, "theory");
    plan.cfg.rho_U = opt_num(t, "rho_U", plan.cfg.rho_U, "theory");
    plan.cfg.delta = opt_num(t, "delta", plan.cfg.delta, "theory");
    plan.cfg.n_x = static_cast<std::size_t>(opt_int(t, "n_x", plan.cfg.n_x, "theory"));
    plan.cfg.alpha_grid_size = static_cast<std::size_t>(
        opt_int(t, "alpha_grid_size", plan.cfg.alpha_grid_size, "theory"));
    plan.trials = static_cast<int>(opt_int(t, "trials", plan.trials, "theory"));
    plan.mono_trials = static_cast<int>(opt_int(t, "mono_trials", plan.mono_trials, "theory"));
    plan.seed = req_seed(t, "seed", "theory");
    plan.cfg.validate();
    return plan;
}

// ---------------------------------------------------------------------------
// Artifacts

inline void stamp_artifact(nlohmann::json& j, const ConfigDoc& cfg) {
    j["tool_version"] = kToolVersion;
    j["config_hash"] = cfg.hash;
}

// CSV artifacts carry provenance as leading comment lines.
inline std::string csv_artifact(const std::string& body, const ConfigDoc& cfg) {
    return "# tool_version=" + std::string(kToolVersion) + "\n# config_hash=" + cfg.hash +
           "\n" + body;
}

inline std::string out_path(const CommonArgs& args, const std::string& name) {
    return (std::filesystem::path(args.out_dir) / name).string();
}

inline void prepare_out_dir(const CommonArgs& args) {
    if (args.out_dir.empty()) throw config_error("--out is required");
    std::filesystem::create_directories(args.out_dir);
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// The run manifest is the only artifact holding a timestamp.
inline void write_run_manifest(const CommonArgs& args, const ConfigDoc& cfg,
                               const std::string& command,
                               const std::vector<std::string>& outputs) {
    nlohmann::json m;
    m["tool_version"] = kToolVersion;
    m["command"] = command;
    m["config_path"] = cfg.path;
    m["config_hash"] = cfg.hash;
    m["timestamp_utc"] = utc_timestamp();
    m["outputs"] = outputs;
    write_text(out_path(args, "manifest.json"), m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Checkpoints: magic, structure hash, parameter count, raw f64 parameters.

inline constexpr std::uint64_t kCheckpointMagic = 0x3154504b43414e54ull;  // "TNACKPT1"

inline void save_checkpoint(const std::string& path, const LayeredNetwork& net) {
    std::vector<std::uint8_t> bytes;
    const ParamVector& p = net.params();
    bytes.reserve(24 + 8 * p.size());
    put_u64(bytes, kCheckpointMagic);
    put_u64(bytes, net.spec().structure_hash());
    put_u64(bytes, p.size());
    for (double v : p) put_f64(bytes, v);
    write_file(path, bytes.data(), bytes.size());
}

inline LayeredNetwork load_checkpoint(const std::string& path, const NetworkSpec& spec) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    std::size_t pos = 0;
    if (bytes.size() < 24 || get_u64(bytes, pos) != kCheckpointMagic)
        throw data_error("checkpoint " + path + ": bad magic");
    if (get_u64(bytes, pos) != spec.structure_hash())
        throw data_error("checkpoint " + path + ": structure hash does not match the "
                         "configured model (checkpoint spec mismatch)");
    const std::uint64_t count = get_u64(bytes, pos);
    if (count != spec.param_count() || bytes.size() != 24 + 8 * count)
        throw data_error("checkpoint " + path + ": truncated or oversized payload");
    ParamVector p(count);
    for (std::uint64_t i = 0; i < count; ++i) p[i] = get_f64(bytes, pos);
    LayeredNetwork net(spec);
    net.set_params(p);
    return net;
}

inline nlohmann::json metrics_json(const Metrics& m) {
    nlohmann::json j;
    j["loss"] = m.loss;
    if (m.accuracy) j["accuracy"] = *m.accuracy;
    else j["accuracy"] = nullptr;
    return j;
}

inline nlohmann::json barrier_json(const BarrierReport& r) {
    nlohmann::json j;
    j["loss_barrier"] = r.loss_barrier;
    j["loss_barrier_alpha"] = r.loss_barrier_alpha;
    if (r.acc_barrier) {
        j["acc_barrier"] = *r.acc_barrier;
        j["acc_barrier_alpha"] = r.acc_barrier_alpha;
    } else {
        j["acc_barrier"] = nullptr;
        j["acc_barrier_alpha"] = nullptr;
    }
    j["grid_size"] = r.grid_size;
    return j;
}

}  // namespace tna::cli
