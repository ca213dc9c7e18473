#include "tna/mask.hpp"

#include <cmath>

#include "tna/io.hpp"
#include "tna/rng.hpp"

namespace tna {

std::size_t GradientMask::count_zeros() const {
    std::size_t z = 0;
    for (std::uint8_t b : bits) z += b == 0;
    return z;
}

double GradientMask::observed_ratio() const {
    if (bits.empty()) return 0.0;
    return static_cast<double>(count_zeros()) / static_cast<double>(bits.size());
}

namespace {
void check_ratio(double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw config_error("mask ratio must be in [0,1]");
}

// Chooses floor(ratio * count) positions in [0, count) without replacement
// and clears those bits in bits[offset .. offset+count).
void zero_exact_count(std::vector<std::uint8_t>& bits, std::size_t offset, std::size_t count,
                      double ratio, Rng& rng) {
    const std::size_t zeros =
        static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count)));
    if (zeros == 0) return;
    std::vector<std::uint32_t> chosen =
        rng.choose_k(static_cast<std::uint32_t>(count), static_cast<std::uint32_t>(zeros));
    for (std::uint32_t c : chosen) bits[offset + c] = 0;
}
}  // namespace

GradientMask sample_mask(const NetworkSpec& spec, double ratio, std::uint64_t seed) {
    spec.validate();
    check_ratio(ratio);
    GradientMask m;
    m.ratio = ratio;
    m.seed = seed;
    m.bits.assign(spec.param_count(), 1);
    const std::vector<LayerLayout> layout = layer_layouts(spec);
    for (std::size_t l = 0; l < layout.size(); ++l) {
        Rng rng(derive_seed(seed, l));
        zero_exact_count(m.bits, layout[l].w_off, layout[l].param_count(), ratio, rng);
    }
    return m;
}

GradientMask reverse_mask(const GradientMask& m) {
    GradientMask out;
    out.ratio = 1.0 - m.observed_ratio();
    out.seed = m.seed;
    out.bits.resize(m.bits.size());
    for (std::size_t i = 0; i < m.bits.size(); ++i) out.bits[i] = m.bits[i] ? 0 : 1;
    return out;
}

GradientMask prune_at_init(LayeredNetwork& net, double ratio, std::uint64_t seed) {
    check_ratio(ratio);
    GradientMask keep;
    keep.ratio = ratio;
    keep.seed = seed;
    keep.bits.assign(net.params().size(), 1);
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const LayerLayout& lay = net.layer(l);
        Rng rng(derive_seed(seed, l));
        // Weights only; biases are never pruned.
        zero_exact_count(keep.bits, lay.w_off, lay.weight_count(), ratio, rng);
    }
    for (std::size_t i = 0; i < keep.bits.size(); ++i) {
        if (keep.bits[i] == 0) net.params()[i] = 0.0;
    }
    return keep;
}

ParamVector apply_mask(const ParamVector& v, const GradientMask& m) {
    if (v.size() != m.bits.size()) throw config_error("apply_mask: length mismatch");
    ParamVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = m.bits[i] ? v[i] : 0.0;
    return out;
}

namespace {
constexpr std::uint64_t kMaskMagic = 0x314b53414d414e54ull;  // "TNAMASK1"
}

void save_mask(const GradientMask& m, const NetworkSpec& spec, const std::string& path) {
    std::vector<std::uint8_t> out;
    put_u64(out, kMaskMagic);
    put_u64(out, spec.structure_hash());
    put_f64(out, m.ratio);
    put_u64(out, m.seed);
    put_u64(out, m.bits.size());
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < m.bits.size(); ++i) {
        if (m.bits[i]) acc |= static_cast<std::uint8_t>(1u << (i % 8));
        if (i % 8 == 7) {
            out.push_back(acc);
            acc = 0;
        }
    }
    if (m.bits.size() % 8 != 0) out.push_back(acc);
    write_file(path, out.data(), out.size());
}

GradientMask load_mask(const std::string& path, const NetworkSpec& spec) {
    const std::vector<std::uint8_t> in = read_file(path);
    std::size_t pos = 0;
    if (get_u64(in, pos) != kMaskMagic) throw io_error("not a mask sidecar file: " + path);
    const std::uint64_t hash = get_u64(in, pos);
    if (hash != spec.structure_hash())
        throw io_error("mask sidecar was generated for a different architecture");
    GradientMask m;
    m.ratio = get_f64(in, pos);
    m.seed = get_u64(in, pos);
    const std::uint64_t n = get_u64(in, pos);
    if (n != spec.param_count()) throw io_error("mask length does not match architecture");
    if (pos + (n + 7) / 8 > in.size()) throw io_error("mask sidecar is truncated");
    m.bits.resize(n);
    for (std::uint64_t i = 0; i < n; ++i)
        m.bits[i] = (in[pos + i / 8] >> (i % 8)) & 1u;
    return m;
}

}  // namespace tna
