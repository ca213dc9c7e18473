#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "common.hpp"
#include "tna/io.hpp"

namespace tna::cli {

int run_data_fetch(const FetchArgs& args) {
    const Manifest manifest = load_manifest(args.manifest_path);
    const std::string cache = args.cache_dir.empty() ? default_cache_dir() : args.cache_dir;

    std::vector<std::string> names = args.datasets;
    if (names.empty())
        for (const auto& [name, files] : manifest) names.push_back(name);

    for (const std::string& name : names) {
        const auto it = manifest.find(name);
        if (it == manifest.end())
            throw config_error("dataset \"" + name + "\" is not in the manifest");
        for (const ManifestEntry& entry : it->second) {
            const std::filesystem::path target = std::filesystem::path(cache) / entry.file;
            if (std::filesystem::exists(target)) {
                // Re-verify a cached file instead of downloading it again.
                const std::vector<std::uint8_t> bytes = read_file(target.string());
                const std::string sha = verify_entry(bytes, entry);
                std::printf("%s: cached, verified (sha256=%s)\n", entry.file.c_str(),
                            sha.c_str());
            } else {
                std::printf("%s: downloading %s\n", entry.file.c_str(), entry.url.c_str());
                std::fflush(stdout);
                const std::string sha = fetch_entry(entry, cache);
                std::printf("%s: verified (sha256=%s)\n", entry.file.c_str(), sha.c_str());
            }
            if (entry.sha256.empty())
                std::printf("%s: note: only md5 is pinned; consider pinning the sha256 "
                            "printed above in the manifest\n",
                            entry.file.c_str());
        }
    }
    return 0;
}

int run_data_inspect(const InspectArgs& args) {
    if (args.cifar) {
        const Dataset ds = parse_cifar10_bin(read_file(args.path));
        std::vector<std::size_t> hist(10, 0);
        for (std::int32_t y : ds.labels) ++hist[static_cast<std::size_t>(y)];
        std::printf("cifar10 records %zu\n", ds.size());
        for (int c = 0; c < 10; ++c) std::printf("label %d count %zu\n", c, hist[c]);
        return 0;
    }
    const IdxTensor t = load_idx_file(args.path);
    std::string dims;
    for (std::size_t i = 0; i < t.dims.size(); ++i)
        dims += (i ? "x" : "") + std::to_string(t.dims[i]);
    std::printf("magic 0x%08x count %u dims %s payload %zu bytes\n", t.magic,
                t.dims.empty() ? 0u : t.dims[0], dims.c_str(), t.payload.size());
    return 0;
}

}  // namespace tna::cli
