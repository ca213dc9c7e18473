#include "tna/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tna/kernels.hpp"
#include "tna/mask.hpp"
#include "tna/rng.hpp"

namespace tna {

void NetworkSpec::validate() const {
    if (layer_widths.size() < 2)
        throw config_error("layer_widths needs at least input and output entries");
    for (std::size_t w : layer_widths) {
        if (w < 1) throw config_error("layer widths must be >= 1");
    }
}

std::size_t NetworkSpec::param_count() const {
    std::size_t d = 0;
    for (std::size_t l = 1; l < layer_widths.size(); ++l)
        d += layer_widths[l] * layer_widths[l - 1] + layer_widths[l];
    return d;
}

std::uint64_t NetworkSpec::structure_hash() const {
    // FNV-1a over a version tag, the widths, and the enums.
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    mix(0x746e612d6e657431ull);  // version tag
    mix(layer_widths.size());
    for (std::size_t w : layer_widths) mix(w);
    mix(static_cast<std::uint64_t>(activation));
    mix(static_cast<std::uint64_t>(output_head));
    return h;
}

std::vector<LayerLayout> layer_layouts(const NetworkSpec& spec) {
    spec.validate();
    std::vector<LayerLayout> out;
    std::size_t off = 0;
    for (std::size_t l = 1; l < spec.layer_widths.size(); ++l) {
        LayerLayout lay;
        lay.rows = spec.layer_widths[l];
        lay.cols = spec.layer_widths[l - 1];
        lay.w_off = off;
        lay.b_off = off + lay.rows * lay.cols;
        off = lay.b_off + lay.rows;
        out.push_back(lay);
    }
    return out;
}

LayeredNetwork::LayeredNetwork(const NetworkSpec& spec)
    : spec_(spec), layout_(layer_layouts(spec)), params_(spec.param_count(), 0.0) {}

void LayeredNetwork::set_params(const ParamVector& p) {
    if (p.size() != params_.size())
        throw config_error("parameter vector length mismatch: got " + std::to_string(p.size()) +
                           ", expected " + std::to_string(params_.size()));
    params_ = p;
}

void Dataset::validate() const {
    if (is_classification()) {
        if (labels.size() != inputs.rows)
            throw data_error("label count does not match input rows");
        if (targets.rows != 0) throw data_error("dataset has both labels and regression targets");
    } else {
        if (targets.rows != inputs.rows)
            throw data_error("target rows do not match input rows");
    }
}

void Dataset::validate_for(const NetworkSpec& spec) const {
    validate();
    if (inputs.cols != spec.input_width())
        throw data_error("input width " + std::to_string(inputs.cols) +
                         " does not match network input " + std::to_string(spec.input_width()));
    if (is_classification()) {
        for (std::int32_t y : labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= spec.output_width())
                throw data_error("class label " + std::to_string(y) + " outside [0, " +
                                 std::to_string(spec.output_width()) + ")");
        }
    } else if (targets.cols != spec.output_width()) {
        throw data_error("regression target width does not match network output");
    }
}

Dataset Dataset::subset(const std::vector<std::uint32_t>& idx) const {
    Dataset out;
    out.inputs.resize(idx.size(), inputs.cols);
    if (is_classification()) {
        out.labels.resize(idx.size());
    } else {
        out.targets.resize(idx.size(), targets.cols);
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const std::size_t src = idx[i];
        if (src >= inputs.rows) throw data_error("subset index out of range");
        std::memcpy(out.inputs.row(i), inputs.row(src), inputs.cols * sizeof(double));
        if (is_classification()) {
            out.labels[i] = labels[src];
        } else {
            std::memcpy(out.targets.row(i), targets.row(src), targets.cols * sizeof(double));
        }
    }
    return out;
}

OptimizerState::OptimizerState(std::size_t d, double lr_, double momentum_, double weight_decay_)
    : momentum_buffer(d, 0.0), lr(lr_), momentum(momentum_), weight_decay(weight_decay_) {
    validate(d);
}

void OptimizerState::validate(std::size_t d) const {
    if (momentum_buffer.size() != d) throw config_error("momentum buffer length mismatch");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw config_error("lr must be nonnegative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw config_error("momentum must be in [0,1)");
    if (!(weight_decay >= 0.0)) throw config_error("weight_decay must be nonnegative");
}

LayeredNetwork build_network(const NetworkSpec& spec) {
    LayeredNetwork net(spec);
    Rng rng(spec.init_seed);
    // Kaiming-uniform fan-in initialization, biases zero.
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const LayerLayout& lay = net.layer(l);
        const double bound = std::sqrt(6.0 / static_cast<double>(lay.cols));
        double* w = net.weight(l);
        for (std::size_t i = 0; i < lay.weight_count(); ++i) w[i] = rng.uniform(-bound, bound);
    }
    return net;
}

namespace {

struct ForwardTrace {
    // act[0] is the input batch; act[l] for l >= 1 is the post-ReLU hidden
    // activation of layer l.  pre[l] is the pre-activation of layer l+1
    // (pre.back() holds the output logits).
    std::vector<Matrix> act;
    std::vector<Matrix> pre;
};

void forward_trace(const LayeredNetwork& net, const Matrix& inputs, ForwardTrace& t) {
    const std::size_t L = net.depth();
    if (inputs.cols != net.spec().input_width())
        throw data_error("forward: input width mismatch");
    t.act.resize(L);
    t.pre.resize(L);
    const Matrix* cur = &inputs;
    for (std::size_t l = 0; l < L; ++l) {
        const LayerLayout& lay = net.layer(l);
        t.pre[l].resize(cur->rows, lay.rows);
        kern::affine_nt(cur->data.data(), cur->rows, cur->cols, net.weight(l), lay.rows,
                        net.bias(l), t.pre[l].data.data());
        if (!kern::all_finite(t.pre[l].data.data(), t.pre[l].data.size()))
            throw numeric_error("non-finite activation at layer " + std::to_string(l + 1));
        if (l + 1 < L) {
            t.act[l + 1].resize(cur->rows, lay.rows);
            kern::relu(t.pre[l].data.data(), t.act[l + 1].data.data(), t.pre[l].data.size());
            cur = &t.act[l + 1];
        }
    }
}

// Loss of the logits plus the gradient dL/dlogits, both as batch means.
double output_loss(const Matrix& logits, const Dataset& batch, Loss loss, Matrix& dlogits) {
    const std::size_t n = logits.rows;
    const std::size_t m = logits.cols;
    dlogits.resize(n, m);
    if (loss == Loss::mse) {
        if (batch.is_classification()) throw config_error("mse loss requires regression targets");
        const double scale = 1.0 / static_cast<double>(n * m);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* y = logits.row(i);
            const double* t = batch.targets.row(i);
            double* g = dlogits.row(i);
            for (std::size_t j = 0; j < m; ++j) {
                const double diff = y[j] - t[j];
                total += diff * diff;
                g[j] = 2.0 * diff * scale;
            }
        }
        return total * scale;
    }
    if (!batch.is_classification()) throw config_error("softmax_ce loss requires class labels");
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* z = logits.row(i);
        double* g = dlogits.row(i);
        double zmax = z[0];
        for (std::size_t j = 1; j < m; ++j) zmax = std::max(zmax, z[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < m; ++j) denom += std::exp(z[j] - zmax);
        const double log_denom = std::log(denom);
        const std::size_t y = static_cast<std::size_t>(batch.labels[i]);
        total += log_denom + zmax - z[y];
        const double inv_denom = 1.0 / denom;
        for (std::size_t j = 0; j < m; ++j) g[j] = std::exp(z[j] - zmax) * inv_denom * inv_n;
        g[y] -= inv_n;
    }
    return total * inv_n;
}

// Copies the rows listed in idx into dst, reusing its buffers.
void gather_batch(const Dataset& src, const std::uint32_t* idx, std::size_t n, Dataset& dst) {
    dst.inputs.resize(n, src.inputs.cols);
    if (src.is_classification()) {
        dst.labels.resize(n);
        dst.targets.resize(0, 0);
    } else {
        dst.labels.clear();
        dst.targets.resize(n, src.targets.cols);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = idx[i];
        std::memcpy(dst.inputs.row(i), src.inputs.row(s), src.inputs.cols * sizeof(double));
        if (src.is_classification()) {
            dst.labels[i] = src.labels[s];
        } else {
            std::memcpy(dst.targets.row(i), src.targets.row(s), src.targets.cols * sizeof(double));
        }
    }
}

}  // namespace

void forward(const LayeredNetwork& net, const Matrix& inputs, Matrix& logits) {
    ForwardTrace t;
    forward_trace(net, inputs, t);
    logits = std::move(t.pre.back());
}

Matrix forward(const LayeredNetwork& net, const Matrix& inputs) {
    Matrix out;
    forward(net, inputs, out);
    return out;
}

double loss_and_grad(const LayeredNetwork& net, const Dataset& batch, Loss loss,
                     ParamVector& grad, std::size_t* correct_out) {
    batch.validate_for(net.spec());
    if (batch.size() == 0) throw data_error("loss_and_grad: empty batch");
    const std::size_t L = net.depth();
    ForwardTrace t;
    forward_trace(net, batch.inputs, t);

    grad.assign(net.params().size(), 0.0);
    Matrix delta;
    const double loss_value = output_loss(t.pre.back(), batch, loss, delta);
    if (correct_out && batch.is_classification()) {
        const Matrix& logits = t.pre.back();
        std::size_t correct = 0;
        for (std::size_t i = 0; i < logits.rows; ++i) {
            const double* z = logits.row(i);
            std::size_t best = 0;
            for (std::size_t j = 1; j < logits.cols; ++j)
                if (z[j] > z[best]) best = j;
            if (static_cast<std::int32_t>(best) == batch.labels[i]) ++correct;
        }
        *correct_out = correct;
    }

    for (std::size_t l = L; l-- > 0;) {
        const LayerLayout& lay = net.layer(l);
        const Matrix& below = l == 0 ? batch.inputs : t.act[l];
        kern::gemm_tn(delta.data.data(), delta.rows, delta.cols, below.data.data(), below.cols,
                      grad.data() + lay.w_off);
        kern::col_sums(delta.data.data(), delta.rows, delta.cols, grad.data() + lay.b_off);
        if (l > 0) {
            Matrix next(delta.rows, lay.cols);
            kern::gemm_nn(delta.data.data(), delta.rows, delta.cols, net.weight(l), lay.cols,
                          next.data.data());
            kern::relu_backward(t.pre[l - 1].data.data(), next.data.data(), next.data.size());
            delta = std::move(next);
        }
    }
    return loss_value;
}

void sgd_step(LayeredNetwork& net, const ParamVector& grad, OptimizerState& state,
              const GradientMask* mask) {
    ParamVector& w = net.params();
    const std::size_t d = w.size();
    if (grad.size() != d) throw config_error("sgd_step: gradient length mismatch");
    state.validate(d);
    if (mask && mask->bits.size() != d) throw config_error("sgd_step: mask length mismatch");

    const double mu = state.momentum;
    const double wd = state.weight_decay;
    const double lr = state.lr;
    double* v = state.momentum_buffer.data();
    const std::uint8_t* m = mask ? mask->bits.data() : nullptr;
#pragma omp parallel for schedule(static) if (d > 65536)
    for (std::size_t i = 0; i < d; ++i) {
        const double eff = grad[i] + wd * w[i];
        v[i] = mu * v[i] + eff;
        if (m && m[i] == 0) continue;  // frozen coordinate: update suppressed
        w[i] -= lr * v[i];
    }
}

Metrics evaluate(const LayeredNetwork& net, const Dataset& data, Loss loss) {
    data.validate_for(net.spec());
    const std::size_t n = data.size();
    if (n == 0) throw data_error("evaluate: empty dataset");
    const std::size_t chunk = 1024;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    Matrix logits;
    Matrix in;
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t nb = std::min(chunk, n - start);
        in.resize(nb, data.inputs.cols);
        std::memcpy(in.data.data(), data.inputs.row(start), nb * data.inputs.cols * sizeof(double));
        forward(net, in, logits);
        if (loss == Loss::mse) {
            for (std::size_t i = 0; i < nb; ++i) {
                const double* y = logits.row(i);
                const double* t = data.targets.row(start + i);
                for (std::size_t j = 0; j < logits.cols; ++j) {
                    const double diff = y[j] - t[j];
                    loss_sum += diff * diff;
                }
            }
        } else {
            for (std::size_t i = 0; i < nb; ++i) {
                const double* z = logits.row(i);
                double zmax = z[0];
                for (std::size_t j = 1; j < logits.cols; ++j) zmax = std::max(zmax, z[j]);
                double denom = 0.0;
                for (std::size_t j = 0; j < logits.cols; ++j) denom += std::exp(z[j] - zmax);
                const std::size_t y = static_cast<std::size_t>(data.labels[start + i]);
                loss_sum += std::log(denom) + zmax - z[y];
            }
        }
        if (data.is_classification()) {
            for (std::size_t i = 0; i < nb; ++i) {
                const double* z = logits.row(i);
                std::size_t best = 0;
                for (std::size_t j = 1; j < logits.cols; ++j) {
                    if (z[j] > z[best]) best = j;  // ties keep the lowest index
                }
                if (static_cast<std::int32_t>(best) == data.labels[start + i]) ++correct;
            }
        }
    }
    Metrics out;
    if (loss == Loss::mse) {
        out.loss = loss_sum / static_cast<double>(n * net.spec().output_width());
    } else {
        out.loss = loss_sum / static_cast<double>(n);
    }
    if (data.is_classification())
        out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return out;
}

std::vector<Metrics> train(LayeredNetwork& net, const Dataset& data, int epochs, int batch_size,
                           OptimizerState& state, const GradientMask* mask,
                           std::uint64_t shuffle_seed, Loss loss) {
    data.validate_for(net.spec());
    if (epochs < 1) throw config_error("train: epochs must be >= 1");
    if (batch_size < 1) throw config_error("train: batch_size must be >= 1");
    const std::size_t n = data.size();
    if (n == 0) throw data_error("train: empty dataset");

    std::vector<std::uint32_t> order(n);
    std::vector<Metrics> history;
    ParamVector grad;
    Dataset batch;
    batch.inputs.resize(std::min<std::size_t>(batch_size, n), data.inputs.cols);
    for (int e = 0; e < epochs; ++e) {
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
        Rng rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(e)));
        rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        try {
            for (std::size_t start = 0; start < n; start += batch_size) {
                const std::size_t nb = std::min<std::size_t>(batch_size, n - start);
                gather_batch(data, order.data() + start, nb, batch);
                std::size_t batch_correct = 0;
                const double batch_loss = loss_and_grad(net, batch, loss, grad, &batch_correct);
                if (!std::isfinite(batch_loss)) throw numeric_error("loss is not finite");
                loss_sum += batch_loss * static_cast<double>(nb);
                correct += batch_correct;
                sgd_step(net, grad, state, mask);
            }
        } catch (const numeric_error& err) {
            throw numeric_error(std::string(err.what()) + " (training epoch " +
                                std::to_string(e + 1) + ")");
        }
        Metrics m;
        m.loss = loss_sum / static_cast<double>(n);
        if (data.is_classification())
            m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
        history.push_back(m);
    }
    return history;
}

}  // namespace tna
