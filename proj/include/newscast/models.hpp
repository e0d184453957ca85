#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newscast/numerics.hpp"

namespace newscast {

enum class Architecture { fused_lstm, price_lstm, dnn };

Architecture parse_architecture(std::string_view name);
std::string_view architecture_name(Architecture arch) noexcept;
/// Display label used in report tables.
std::string_view architecture_label(Architecture arch) noexcept;

inline constexpr std::size_t kLstmUnits = 50;

/// One LSTM layer. Gate blocks are stacked along the first axis of W, U and b
/// in the order (input i, forget f, cell candidate g, output o):
///   i, f, o = sigmoid(W x + U h + b)   g = tanh(W x + U h + b)
///   c_t = f * c_prev + i * g           h_t = o * tanh(c_t)
struct LstmLayerParams {
    Tensor W;  // (4 * units, input_dim)
    Tensor U;  // (4 * units, units)
    Tensor b;  // (4 * units)
    std::size_t units = 0;
    bool return_sequences = false;

    std::size_t input_dim() const { return W.rank() == 2 ? W.extent(1) : 0; }
    /// Throws ShapeError naming `layer` on any inconsistent extent.
    void validate(std::string_view layer) const;
};

struct DenseLayerParams {
    Tensor W;  // (out_dim, in_dim)
    Tensor b;  // (out_dim)
    Activation activation = Activation::linear;
    double alpha = kDefaultLeakyAlpha;

    std::size_t in_dim() const { return W.rank() == 2 ? W.extent(1) : 0; }
    std::size_t out_dim() const { return W.rank() == 2 ? W.extent(0) : 0; }
    void validate(std::string_view layer) const;
};

/// Fixed affine standardization applied to DNN inputs: (x - mean) / stddev
/// per input position. Empty means identity. Frozen once training starts.
struct InputStandardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool empty() const noexcept { return mean.empty(); }
    friend bool operator==(const InputStandardizer&, const InputStandardizer&) = default;
};

struct ModelParams {
    Architecture arch = Architecture::price_lstm;
    std::size_t window = 8;
    std::size_t feature_dim = 1;
    std::vector<LstmLayerParams> lstm;
    std::vector<DenseLayerParams> dense;
    InputStandardizer standardizer;

    /// Learnable tensors in checkpoint order: each LSTM layer's W, U, b, then
    /// each dense layer's W, b.
    std::vector<Tensor*> tensors();
    std::vector<const Tensor*> tensors() const;
    std::vector<std::string> tensor_names() const;
    TensorList snapshot() const;
    /// Overwrites every learnable tensor; shapes must match.
    void assign(const TensorList& values);
    /// Zero tensors shaped like the learnable set.
    TensorList zeros_like() const;
    /// Checks the layer stack against the architecture invariants.
    void validate() const;
    /// Hash of the architecture and every parameter bit pattern.
    std::uint64_t fingerprint() const;
};

struct ModelShape {
    std::size_t window = 8;
    std::size_t lstm_units = kLstmUnits;
    std::size_t lstm_layers = 3;
    std::vector<std::size_t> dnn_hidden = {256, 128, 64};
    double leaky_alpha = kDefaultLeakyAlpha;
};

/// Glorot-uniform weights and zero biases, drawn in tensor order.
ModelParams make_model(Architecture arch, Rng& rng, const ModelShape& shape = {});

std::size_t count_params(const ModelParams& params);

struct LstmStepCache {
    std::vector<double> x;
    std::vector<double> h_prev;
    std::vector<double> c_prev;
    std::vector<double> gates;  // activated i, f, g, o blocks
    std::vector<double> c;
    std::vector<double> tanh_c;
};

struct LstmStepResult {
    std::vector<double> h;
    std::vector<double> c;
    LstmStepCache cache;
};

LstmStepResult lstm_cell_step(const LstmLayerParams& params, std::span<const double> x,
                              std::span<const double> h_prev, std::span<const double> c_prev,
                              std::string_view layer = "lstm");

using LstmSequenceCache = std::vector<LstmStepCache>;

/// Runs the layer over a (steps, input_dim) sequence from zero state. Output
/// is (steps, units) with return_sequences, otherwise (units).
Tensor lstm_forward(const LstmLayerParams& params, const Tensor& sequence,
                    LstmSequenceCache* cache = nullptr, std::string_view layer = "lstm");

struct LstmLayerGrads {
    Tensor dW;
    Tensor dU;
    Tensor db;
    Tensor dx;  // (steps, input_dim)
};

/// BPTT through one layer given dLoss/dOutput shaped like lstm_forward's
/// output and the cache from that forward call.
LstmLayerGrads lstm_backward(const LstmLayerParams& params, const LstmSequenceCache& cache,
                             const Tensor& d_output, std::string_view layer = "lstm");

struct SampleCache {
    std::vector<LstmSequenceCache> lstm;
    std::vector<std::vector<double>> dense_inputs;
    std::vector<std::vector<double>> dense_preact;
};

struct ForwardCache {
    Architecture arch = Architecture::price_lstm;
    std::uint64_t fingerprint = 0;
    std::vector<SampleCache> samples;
    bool valid = false;
};

struct ForwardResult {
    Tensor predictions;  // (N, 1)
    ForwardCache cache;
};

/// Batch layout: (N, window, 4) fused_lstm, (N, window, 1) price_lstm,
/// (N, window) dnn. Shapes are checked before any arithmetic.
ForwardResult model_forward(const ModelParams& params, const Tensor& batch);

/// Forward pass without retaining caches.
Tensor predict(const ModelParams& params, const Tensor& batch);

/// Gradients of sum_n dloss_dpred[n] * pred[n] w.r.t. every learnable tensor,
/// in `tensors()` order. Throws StateError when the cache is missing or was
/// produced by different parameters.
TensorList model_backward(const ModelParams& params, const ForwardCache& cache, const Tensor& dloss_dpred);

/// Expected batch shape for `n` samples.
std::vector<std::size_t> batch_shape(const ModelParams& params, std::size_t n);

}  // namespace newscast
