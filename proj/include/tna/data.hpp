#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tna/errors.hpp"
#include "tna/nn.hpp"

namespace tna {

inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801u;
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803u;

struct IdxTensor {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> dims;  // big-endian in the file; host order here
    std::vector<std::uint8_t> payload;

    std::size_t count() const { return dims.empty() ? 0 : dims[0]; }
};

// Strict IDX parse.  Accepts exactly the label magic (0x00000801, one dim)
// and the image magic (0x00000803, three dims).  Rejections raise data_error
// with one of three documented message prefixes:
//   "idx: bad magic", "idx: truncated payload", "idx: trailing garbage".
IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes);

// Inverse of parse_idx: serialize(parse(bytes)) == bytes for well-formed input.
std::vector<std::uint8_t> serialize_idx(const IdxTensor& t);

// Images flattened row-major to (count, rows*cols), raw 0..255 values.
Dataset make_image_dataset(const IdxTensor& images, const IdxTensor& labels);

// CIFAR-10 binary batch: records of one label byte + 3072 channel-major
// pixel bytes.  Rejections raise data_error with message prefix
// "cifar: bad record length" or "cifar: label out of range".
Dataset parse_cifar10_bin(const std::vector<std::uint8_t>& bytes);

enum class PolyKind { poly2, poly3 };

// poly2: y = 2x^2 - 1 with x on [-1,1]; poly3: y = (x-3)^3 with x on [2,4].
// x is a deterministic uniform grid containing both endpoints; the Gaussian
// noise (std noise_std) is the only randomness.
Dataset gen_polynomial(PolyKind kind, std::size_t n, double noise_std, std::uint64_t seed);

// Gaussian clusters around standard-normal centers scaled by `separation`;
// sample order is class-major, labels are the class ids.
Dataset gen_blobs(std::size_t n_classes, std::size_t n_per_class, std::size_t dim,
                  double separation, std::uint64_t seed);

enum class NormScheme { unit_scale, standardize };

struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> scale;  // population std; 1.0 for zero-variance features
};

// Fit on one split, apply to any split with the same feature width.
FeatureStats standardize_fit(const Dataset& data);
Dataset standardize_apply(const Dataset& data, const FeatureStats& stats);

// unit_scale divides inputs by 255; standardize fits on `data` itself.
Dataset normalize(const Dataset& data, NormScheme scheme);

// Gzip-aware single-file load.
IdxTensor load_idx_file(const std::string& path);

// Reads a gzip-or-raw IDX image/label file pair into a raw-pixel Dataset.
Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path);

// One downloadable file.  At least one digest must be pinned before fetch
// will trust a download; every pinned digest must match.
struct ManifestEntry {
    std::string file;
    std::string url;
    std::string sha256;  // empty when not pinned
    std::string md5;     // empty when not pinned
};

// dataset name -> its files.
using Manifest = std::map<std::string, std::vector<ManifestEntry>>;

Manifest load_manifest(const std::string& path);

// $TNA_DATA_CACHE when set, else "data/cache".
std::string default_cache_dir();

// Checks every pinned digest of `entry` against `bytes`; returns the
// computed sha256 so callers can pin it when only md5 was available.
std::string verify_entry(const std::vector<std::uint8_t>& bytes, const ManifestEntry& entry);

// Downloads entry.url, verifies, then moves the file into the cache with a
// temp-file + rename; any failure leaves the cache untouched.  Returns the
// computed sha256.
std::string fetch_entry(const ManifestEntry& entry, const std::string& cache_dir);

}  // namespace tna
