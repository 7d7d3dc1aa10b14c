#pragma once

// Minimal reverse-mode differentiable network over a fixed layer chain.
// Supported layers: Dense, Conv1D (1D over time, zero "same" padding), LSTM,
// bidirectional LSTM (forward/backward hidden sequences concatenated on the
// channel axis), Sigmoid, ReLU, LeakyReLU, Flatten, Reshape.
//
// Parameters live in one flat vector with per-layer offsets. forward() runs on
// a batch (leading dimension) and records the activations backward() needs.
// run_forward/run_backward are the pure variants; they allow several recorded
// passes through the same network to coexist (joint training needs that).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moocxfer/tensor.hpp"

namespace moocxfer::nn {

using moocxfer::Shape;
using moocxfer::Tensor;

enum class LayerKind {
    Dense,
    Conv1D,
    Lstm,
    BiLstm,
    Sigmoid,
    ReLU,
    LeakyReLU,
    Flatten,
    Reshape,
};

std::string layer_kind_name(LayerKind kind);

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    int units = 0;      // Dense outputs, Conv1D channels, LSTM/BiLSTM cells
    int kernel = 1;     // Conv1D kernel size
    double alpha = 0.0; // LeakyReLU slope
    Shape target_shape; // Reshape

    static LayerSpec dense(int n);
    static LayerSpec conv1d(int channels, int kernel_size);
    static LayerSpec lstm(int cells);
    static LayerSpec bilstm(int cells);
    static LayerSpec sigmoid();
    static LayerSpec relu();
    static LayerSpec leaky_relu(double alpha);
    static LayerSpec flatten();
    static LayerSpec reshape(Shape shape);
};

// A layer spec resolved against its input shape.
struct LayerLayout {
    LayerSpec spec;
    Shape in_shape;   // per-sample
    Shape out_shape;  // per-sample
    std::size_t param_offset = 0;
    std::size_t param_count = 0;
};

// Post-activation LSTM internals for one direction, kept for backprop.
struct LstmTrace {
    std::size_t steps = 0, batch = 0, cells = 0;
    std::vector<double> gates;      // [T][N][4H], blocks i,f,g,o
    std::vector<double> cell;       // [T][N][H]
    std::vector<double> tanh_cell;  // [T][N][H]
    std::vector<double> hidden;     // [T][N][H]
};

struct Tape {
    Tensor input;
    std::vector<Tensor> outputs;               // one per layer
    std::vector<std::vector<LstmTrace>> lstm;  // per layer, 0..2 traces
    const Tensor& output() const { return outputs.back(); }
};

struct BackwardResult {
    std::vector<double> param_grads;  // dLoss/dtheta, aligned with params()
    Tensor input_grad;                // dLoss/dinput
};

class Network {
public:
    Network() = default;

    // Initializes parameters deterministically from the seed: Glorot-uniform
    // weights, zero biases, LSTM forget-gate bias 1.0. Throws
    // std::invalid_argument naming the offending layer index on a shape
    // mismatch in the chain.
    static Network build(const std::vector<LayerSpec>& specs, const Shape& input_shape,
                         std::uint64_t seed);

    const Shape& input_shape() const { return input_shape_; }
    const Shape& output_shape() const { return layers_.back().out_shape; }
    const std::vector<LayerLayout>& layers() const { return layers_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    // Stateful convenience wrappers around run_forward/run_backward. forward
    // stores the tape; backward consumes the stored tape and throws
    // std::logic_error when no forward pass has been recorded.
    Tensor forward(const Tensor& input);
    std::vector<double> backward(const Tensor& output_grad);
    const Tape* last_tape() const { return tape_ ? &*tape_ : nullptr; }

    void dump_params_csv(const std::string& path) const;

private:
    friend Tape run_forward(const Network& net, const Tensor& input);
    friend BackwardResult run_backward(const Network& net, const Tape& tape,
                                       const Tensor& output_grad);

    Shape input_shape_;
    std::vector<LayerLayout> layers_;
    std::vector<double> params_;
    std::optional<Tape> tape_;
};

// Pure forward pass; input shape must be [N] + net.input_shape(), all finite.
Tape run_forward(const Network& net, const Tensor& input);

// Pure backward pass for a recorded tape; output_grad must match the output.
BackwardResult run_backward(const Network& net, const Tape& tape, const Tensor& output_grad);

}  // namespace moocxfer::nn
