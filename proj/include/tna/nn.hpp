#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tna/errors.hpp"
#include "tna/matrix.hpp"

namespace tna {

struct GradientMask;  // defined in tna/mask.hpp

// Flat view of all parameters in canonical order: for each layer l = 1..L,
// the weight matrix W_l (J_l x J_{l-1}, row-major) followed by the bias b_l.
using ParamVector = std::vector<double>;

enum class Activation { relu };
enum class OutputHead { linear, softmax_ce_logits };
enum class Loss { mse, softmax_ce };

struct NetworkSpec {
    std::vector<std::size_t> layer_widths;  // J_0 .. J_L
    Activation activation = Activation::relu;
    OutputHead output_head = OutputHead::linear;
    std::uint64_t init_seed = 0;

    void validate() const;
    std::size_t depth() const { return layer_widths.size() - 1; }  // L
    std::size_t input_width() const { return layer_widths.front(); }
    std::size_t output_width() const { return layer_widths.back(); }
    std::size_t param_count() const;
    // Hash of the architecture (widths + enums, not the seed); ties masks
    // and checkpoints to a network shape.
    std::uint64_t structure_hash() const;
};

// Offsets of one layer inside the canonical flat layout.
struct LayerLayout {
    std::size_t w_off = 0;  // first weight entry
    std::size_t b_off = 0;  // first bias entry
    std::size_t rows = 0;   // J_l
    std::size_t cols = 0;   // J_{l-1}
    std::size_t weight_count() const { return rows * cols; }
    std::size_t param_count() const { return rows * cols + rows; }
    std::size_t end() const { return b_off + rows; }
};

std::vector<LayerLayout> layer_layouts(const NetworkSpec& spec);

// Dense MLP.  Parameters are stored as one flat ParamVector in canonical
// order; per-layer weight/bias accessors are views into that storage, so
// flatten/unflatten round-trips are exact by construction.
class LayeredNetwork {
public:
    LayeredNetwork() = default;
    explicit LayeredNetwork(const NetworkSpec& spec);  // zero-initialized

    const NetworkSpec& spec() const { return spec_; }
    std::size_t depth() const { return layout_.size(); }
    const LayerLayout& layer(std::size_t l) const { return layout_[l]; }

    double* weight(std::size_t l) { return params_.data() + layout_[l].w_off; }
    const double* weight(std::size_t l) const { return params_.data() + layout_[l].w_off; }
    double* bias(std::size_t l) { return params_.data() + layout_[l].b_off; }
    const double* bias(std::size_t l) const { return params_.data() + layout_[l].b_off; }

    ParamVector& params() { return params_; }
    const ParamVector& params() const { return params_; }
    ParamVector to_params() const { return params_; }
    void set_params(const ParamVector& p);

private:
    NetworkSpec spec_;
    std::vector<LayerLayout> layout_;
    ParamVector params_;
};

inline ParamVector flatten(const LayeredNetwork& net) { return net.to_params(); }
inline void unflatten(const ParamVector& p, LayeredNetwork& net) { net.set_params(p); }

// Either classification (labels set, targets empty) or regression (targets
// set, labels empty).
struct Dataset {
    Matrix inputs;
    std::vector<std::int32_t> labels;
    Matrix targets;

    bool is_classification() const { return !labels.empty(); }
    std::size_t size() const { return inputs.rows; }
    void validate() const;
    void validate_for(const NetworkSpec& spec) const;
    Dataset subset(const std::vector<std::uint32_t>& idx) const;
};

struct Metrics {
    double loss = 0.0;
    std::optional<double> accuracy;
};

struct OptimizerState {
    ParamVector momentum_buffer;
    double lr = 0.1;
    double momentum = 0.0;
    double weight_decay = 0.0;

    OptimizerState() = default;
    OptimizerState(std::size_t d, double lr_, double momentum_, double weight_decay_);
    void validate(std::size_t d) const;
};

LayeredNetwork build_network(const NetworkSpec& spec);

void forward(const LayeredNetwork& net, const Matrix& inputs, Matrix& logits);
Matrix forward(const LayeredNetwork& net, const Matrix& inputs);

// Returns the batch loss and writes the full gradient in canonical layout.
// correct_out, when non-null and the batch is classification, receives the
// number of argmax-correct rows of this batch's forward pass.
double loss_and_grad(const LayeredNetwork& net, const Dataset& batch, Loss loss,
                     ParamVector& grad, std::size_t* correct_out = nullptr);

// w <- w - u with u = lr * v, v <- momentum * v + (grad + weight_decay * w);
// when a mask is given the composed update u is masked, so frozen
// coordinates are bit-identical before and after regardless of momentum or
// weight decay.
void sgd_step(LayeredNetwork& net, const ParamVector& grad, OptimizerState& state,
              const GradientMask* mask);

Metrics evaluate(const LayeredNetwork& net, const Dataset& data, Loss loss);

// Per-epoch shuffled mini-batch SGD; the shuffle is driven solely by
// shuffle_seed, so equal inputs give a bit-identical trained network.
std::vector<Metrics> train(LayeredNetwork& net, const Dataset& data, int epochs,
                           int batch_size, OptimizerState& state, const GradientMask* mask,
                           std::uint64_t shuffle_seed, Loss loss);

}  // namespace tna
