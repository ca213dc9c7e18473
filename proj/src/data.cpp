#include "tna/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include <httplib.h>
#include <json.hpp>

#include "tna/io.hpp"
#include "tna/rng.hpp"

namespace tna {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

}  // namespace

IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw data_error("idx: truncated payload (no magic)");
    const std::uint32_t magic = read_be32(bytes, 0);
    std::size_t ndims = 0;
    if (magic == kIdxLabelMagic) ndims = 1;
    else if (magic == kIdxImageMagic) ndims = 3;
    else throw data_error("idx: bad magic " + std::to_string(magic));

    const std::size_t header = 4 + 4 * ndims;
    if (bytes.size() < header) throw data_error("idx: truncated payload (short header)");

    IdxTensor t;
    t.magic = magic;
    t.dims.resize(ndims);
    std::size_t payload = 1;
    for (std::size_t i = 0; i < ndims; ++i) {
        t.dims[i] = read_be32(bytes, 4 + 4 * i);
        // Overflow means the declared payload exceeds any real buffer.
        if (t.dims[i] != 0 && payload > std::numeric_limits<std::size_t>::max() / t.dims[i])
            throw data_error("idx: truncated payload (size overflow)");
        payload *= t.dims[i];
    }
    const std::size_t expected = header + payload;
    if (bytes.size() < expected) throw data_error("idx: truncated payload");
    if (bytes.size() > expected) throw data_error("idx: trailing garbage");
    t.payload.assign(bytes.begin() + header, bytes.end());
    return t;
}

std::vector<std::uint8_t> serialize_idx(const IdxTensor& t) {
    std::size_t ndims = 0;
    if (t.magic == kIdxLabelMagic) ndims = 1;
    else if (t.magic == kIdxImageMagic) ndims = 3;
    else throw data_error("idx: bad magic " + std::to_string(t.magic));
    if (t.dims.size() != ndims) throw data_error("idx: dimension count does not match magic");
    std::size_t payload = 1;
    for (std::uint32_t d : t.dims) payload *= d;
    if (t.payload.size() != payload) throw data_error("idx: payload size does not match dims");

    std::vector<std::uint8_t> out;
    out.reserve(4 + 4 * ndims + t.payload.size());
    append_be32(out, t.magic);
    for (std::uint32_t d : t.dims) append_be32(out, d);
    out.insert(out.end(), t.payload.begin(), t.payload.end());
    return out;
}

Dataset make_image_dataset(const IdxTensor& images, const IdxTensor& labels) {
    if (images.magic != kIdxImageMagic) throw data_error("idx: expected an image tensor");
    if (labels.magic != kIdxLabelMagic) throw data_error("idx: expected a label tensor");
    if (images.dims[0] != labels.dims[0])
        throw data_error("idx: image/label count mismatch");

    const std::size_t n = images.dims[0];
    const std::size_t features = std::size_t(images.dims[1]) * images.dims[2];
    Dataset ds;
    ds.inputs.resize(n, features);
    for (std::size_t i = 0; i < n * features; ++i)
        ds.inputs.data[i] = double(images.payload[i]);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds.labels[i] = std::int32_t(labels.payload[i]);
    return ds;
}

Dataset parse_cifar10_bin(const std::vector<std::uint8_t>& bytes) {
    constexpr std::size_t record = 3073;
    constexpr std::size_t pixels = 3072;
    if (bytes.size() % record != 0)
        throw data_error("cifar: bad record length (not a multiple of 3073)");
    const std::size_t n = bytes.size() / record;

    Dataset ds;
    ds.inputs.resize(n, pixels);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t label = bytes[i * record];
        if (label > 9) throw data_error("cifar: label out of range");
        ds.labels[i] = std::int32_t(label);
        const std::uint8_t* px = bytes.data() + i * record + 1;
        double* row = ds.inputs.row(i);
        for (std::size_t j = 0; j < pixels; ++j) row[j] = double(px[j]);
    }
    return ds;
}

Dataset gen_polynomial(PolyKind kind, std::size_t n, double noise_std, std::uint64_t seed) {
    if (n < 1) throw config_error("gen_polynomial: n must be >= 1");
    if (!(noise_std >= 0.0)) throw config_error("gen_polynomial: noise_std must be >= 0");
    const double lo = kind == PolyKind::poly2 ? -1.0 : 2.0;
    const double hi = kind == PolyKind::poly2 ? 1.0 : 4.0;

    Dataset ds;
    ds.inputs.resize(n, 1);
    ds.targets.resize(n, 1);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double x =
            n == 1 ? 0.5 * (lo + hi)
                   : lo + (hi - lo) * (double(i) / double(n - 1));
        double y;
        if (kind == PolyKind::poly2) {
            y = 2.0 * x * x - 1.0;
        } else {
            const double t = x - 3.0;
            y = t * t * t;
        }
        ds.inputs.data[i] = x;
        ds.targets.data[i] = y + noise_std * rng.normal();
    }
    return ds;
}

Dataset gen_blobs(std::size_t n_classes, std::size_t n_per_class, std::size_t dim,
                  double separation, std::uint64_t seed) {
    if (n_classes < 1 || n_per_class < 1 || dim < 1)
        throw config_error("gen_blobs: all sizes must be >= 1");
    if (!(separation >= 0.0)) throw config_error("gen_blobs: separation must be >= 0");

    Rng rng(seed);
    std::vector<double> centers(n_classes * dim);
    for (double& c : centers) c = separation * rng.normal();

    Dataset ds;
    ds.inputs.resize(n_classes * n_per_class, dim);
    ds.labels.resize(n_classes * n_per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
            double* x = ds.inputs.row(row);
            for (std::size_t k = 0; k < dim; ++k) x[k] = centers[c * dim + k] + rng.normal();
            ds.labels[row] = std::int32_t(c);
        }
    }
    return ds;
}

FeatureStats standardize_fit(const Dataset& data) {
    if (data.size() == 0) throw data_error("normalize: empty dataset");
    const std::size_t n = data.inputs.rows;
    const std::size_t m = data.inputs.cols;
    FeatureStats stats;
    stats.mean.assign(m, 0.0);
    stats.scale.assign(m, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = data.inputs.row(i);
        for (std::size_t j = 0; j < m; ++j) stats.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) stats.mean[j] /= double(n);
    std::vector<double> var(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = data.inputs.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double d = row[j] - stats.mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double sd = std::sqrt(var[j] / double(n));
        // Zero-variance features are centered only.
        stats.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return stats;
}

Dataset standardize_apply(const Dataset& data, const FeatureStats& stats) {
    if (data.inputs.cols != stats.mean.size() || data.inputs.cols != stats.scale.size())
        throw data_error("normalize: feature width mismatch");
    Dataset out = data;
    for (std::size_t i = 0; i < out.inputs.rows; ++i) {
        double* row = out.inputs.row(i);
        for (std::size_t j = 0; j < out.inputs.cols; ++j)
            row[j] = (row[j] - stats.mean[j]) / stats.scale[j];
    }
    return out;
}

Dataset normalize(const Dataset& data, NormScheme scheme) {
    if (data.size() == 0) throw data_error("normalize: empty dataset");
    if (scheme == NormScheme::unit_scale) {
        Dataset out = data;
        for (double& v : out.inputs.data) v /= 255.0;
        return out;
    }
    return standardize_apply(data, standardize_fit(data));
}

namespace {
std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_file(path);
    if (looks_gzip(bytes)) return gzip_decompress(bytes);
    return bytes;
}
}  // namespace

IdxTensor load_idx_file(const std::string& path) { return parse_idx(read_maybe_gzip(path)); }

Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path) {
    const IdxTensor images = parse_idx(read_maybe_gzip(images_path));
    const IdxTensor labels = parse_idx(read_maybe_gzip(labels_path));
    return make_image_dataset(images, labels);
}

Manifest load_manifest(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const std::exception& e) {
        throw config_error("manifest: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("datasets") || !doc["datasets"].is_object())
        throw config_error("manifest: missing top-level \"datasets\" object");

    auto read_digest = [](const nlohmann::json& obj, const char* key) -> std::string {
        if (!obj.contains(key) || obj[key].is_null()) return "";
        if (!obj[key].is_string()) throw config_error(std::string("manifest: ") + key +
                                                      " must be a string or null");
        std::string s = obj[key].get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        return s;
    };

    Manifest manifest;
    for (const auto& [name, spec] : doc["datasets"].items()) {
        if (!spec.is_object() || !spec.contains("files") || !spec["files"].is_array())
            throw config_error("manifest: dataset " + name + " needs a \"files\" array");
        std::vector<ManifestEntry> files;
        for (const auto& f : spec["files"]) {
            if (!f.is_object() || !f.contains("file") || !f.contains("url"))
                throw config_error("manifest: every file needs \"file\" and \"url\"");
            ManifestEntry e;
            e.file = f["file"].get<std::string>();
            e.url = f["url"].get<std::string>();
            e.sha256 = read_digest(f, "sha256");
            e.md5 = read_digest(f, "md5");
            files.push_back(std::move(e));
        }
        manifest[name] = std::move(files);
    }
    return manifest;
}

std::string default_cache_dir() {
    const char* env = std::getenv("TNA_DATA_CACHE");
    if (env && *env) return env;
    return "data/cache";
}

std::string verify_entry(const std::vector<std::uint8_t>& bytes, const ManifestEntry& entry) {
    const std::string got_sha = sha256_hex(bytes.data(), bytes.size());
    if (entry.sha256.empty() && entry.md5.empty())
        throw data_error("fetch: no checksum pinned for " + entry.file +
                         "; refusing to trust the download");
    if (!entry.sha256.empty() && got_sha != entry.sha256)
        throw data_error("fetch: sha256 mismatch for " + entry.file + " (expected " +
                         entry.sha256 + ", got " + got_sha + ")");
    if (!entry.md5.empty()) {
        const std::string got_md5 = md5_hex(bytes.data(), bytes.size());
        if (got_md5 != entry.md5)
            throw data_error("fetch: md5 mismatch for " + entry.file + " (expected " +
                             entry.md5 + ", got " + got_md5 + ")");
    }
    return got_sha;
}

namespace {
void split_url(const std::string& url, std::string& base, std::string& path) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw config_error("fetch: unsupported url " + url);
    const std::string proto = url.substr(0, scheme);
    if (proto != "http" && proto != "https")
        throw config_error("fetch: unsupported url scheme \"" + proto + "\"");
    const std::size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        base = url;
        path = "/";
    } else {
        base = url.substr(0, slash);
        path = url.substr(slash);
    }
}
}  // namespace

std::string fetch_entry(const ManifestEntry& entry, const std::string& cache_dir) {
    std::string base, path;
    split_url(entry.url, base, path);

    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(300, 0);
    httplib::Result res = client.Get(path);
    if (!res)
        throw io_error("fetch: connection failed for " + entry.url + " (" +
                       httplib::to_string(res.error()) + ")");
    if (res->status != 200)
        throw io_error("fetch: http status " + std::to_string(res->status) + " for " +
                       entry.url);

    const std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
    const std::string sha = verify_entry(bytes, entry);

    namespace fs = std::filesystem;
    const fs::path final_path = fs::path(cache_dir) / entry.file;
    fs::create_directories(final_path.parent_path());
    const fs::path tmp_path = final_path.string() + ".part";
    write_file(tmp_path.string(), bytes.data(), bytes.size());
    fs::rename(tmp_path, final_path);
    return sha;
}

}  // namespace tna
