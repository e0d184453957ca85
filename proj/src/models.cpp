#include "newscast/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "newscast/errors.hpp"

namespace newscast {

namespace {

// out[r] += sum_c m[r, c] * v[c]
inline void gemv_acc(const double* m, std::size_t rows, std::size_t cols, const double* v, double* out) {
    // Four rows at a time: independent partial sums break the add dependency
    // chain and share each load of v. The order is fixed, so results stay
    // reproducible.
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double* m0 = m + r * cols;
        const double* m1 = m0 + cols;
        const double* m2 = m1 + cols;
        const double* m3 = m2 + cols;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = v[c];
            a0 += m0[c] * x;
            a1 += m1[c] * x;
            a2 += m2[c] * x;
            a3 += m3[c] * x;
        }
        out[r] += a0;
        out[r + 1] += a1;
        out[r + 2] += a2;
        out[r + 3] += a3;
    }
    for (; r < rows; ++r) {
        const double* row = m + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * v[c];
        out[r] += acc;
    }
}

// out[c] += sum_r m[r, c] * v[r]
inline void gemv_t_acc(const double* m, std::size_t rows, std::size_t cols, const double* v, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * cols;
        const double s = v[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] += s * row[c];
    }
}

// m[r, c] += a[r] * b[c]
inline void outer_acc(double* m, std::size_t rows, std::size_t cols, const double* a, const double* b) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = m + r * cols;
        const double s = a[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += s * b[c];
    }
}

std::string layer_name(std::string_view kind, std::size_t index) {
    return std::string(kind) + std::to_string(index);
}

/// Gate pre-activations -> activated (i, f, g, o), new cell, tanh(cell), hidden.
inline void lstm_gates(const LstmLayerParams& p, const double* x, const double* h_prev,
                       const double* c_prev, double* gates, double* c, double* tanh_c, double* h) {
    const std::size_t u = p.units;
    const std::size_t in = p.input_dim();
    std::copy(p.b.data(), p.b.data() + 4 * u, gates);
    gemv_acc(p.W.data(), 4 * u, in, x, gates);
    gemv_acc(p.U.data(), 4 * u, u, h_prev, gates);
    for (std::size_t k = 0; k < u; ++k) {
        gates[k] = sigmoid(gates[k]);
        gates[u + k] = sigmoid(gates[u + k]);
        gates[2 * u + k] = std::tanh(gates[2 * u + k]);
        gates[3 * u + k] = sigmoid(gates[3 * u + k]);
        c[k] = gates[u + k] * c_prev[k] + gates[k] * gates[2 * u + k];
        tanh_c[k] = std::tanh(c[k]);
        h[k] = gates[3 * u + k] * tanh_c[k];
    }
}

/// Runs one layer over `steps` inputs of width input_dim; writes every hidden
/// state into `hidden` (steps * units).
void run_lstm(const LstmLayerParams& p, const double* seq, std::size_t steps, LstmSequenceCache* cache,
              std::vector<double>& hidden) {
    const std::size_t u = p.units;
    const std::size_t in = p.input_dim();
    hidden.assign(steps * u, 0.0);
    std::vector<double> h(u, 0.0), c(u, 0.0), gates(4 * u), c_new(u), tanh_c(u);
    if (cache) {
        cache->clear();
        cache->reserve(steps);
    }
    for (std::size_t t = 0; t < steps; ++t) {
        const double* x = seq + t * in;
        double* h_out = hidden.data() + t * u;
        lstm_gates(p, x, h.data(), c.data(), gates.data(), c_new.data(), tanh_c.data(), h_out);
        if (cache) {
            cache->push_back({std::vector<double>(x, x + in), h, c, gates, c_new, tanh_c});
        }
        std::copy(h_out, h_out + u, h.begin());
        c.swap(c_new);
    }
}

/// BPTT through one layer. `d_hidden` is dLoss/dh_t for each step (steps *
/// units). Accumulates into the layer's gradients and returns dLoss/dx_t
/// (steps * input_dim).
std::vector<double> backprop_lstm(const LstmLayerParams& p, const LstmSequenceCache& cache,
                                  const std::vector<double>& d_hidden, Tensor& dW, Tensor& dU, Tensor& db) {
    const std::size_t u = p.units;
    const std::size_t in = p.input_dim();
    const std::size_t steps = cache.size();
    std::vector<double> dx(steps * in, 0.0);
    std::vector<double> dh_next(u, 0.0), dc_next(u, 0.0), dz(4 * u);
    for (std::size_t step = steps; step-- > 0;) {
        const auto& s = cache[step];
        const double* gi = s.gates.data();
        const double* gf = gi + u;
        const double* gg = gi + 2 * u;
        const double* go = gi + 3 * u;
        for (std::size_t k = 0; k < u; ++k) {
            const double dh = d_hidden[step * u + k] + dh_next[k];
            const double d_o = dh * s.tanh_c[k];
            const double dc = dh * go[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]) + dc_next[k];
            const double d_i = dc * gg[k];
            const double d_g = dc * gi[k];
            const double d_f = dc * s.c_prev[k];
            dc_next[k] = dc * gf[k];
            dz[k] = d_i * gi[k] * (1.0 - gi[k]);
            dz[u + k] = d_f * gf[k] * (1.0 - gf[k]);
            dz[2 * u + k] = d_g * (1.0 - gg[k] * gg[k]);
            dz[3 * u + k] = d_o * go[k] * (1.0 - go[k]);
        }
        outer_acc(dW.data(), 4 * u, in, dz.data(), s.x.data());
        outer_acc(dU.data(), 4 * u, u, dz.data(), s.h_prev.data());
        for (std::size_t r = 0; r < 4 * u; ++r) db[r] += dz[r];
        gemv_t_acc(p.W.data(), 4 * u, in, dz.data(), dx.data() + step * in);
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        gemv_t_acc(p.U.data(), 4 * u, u, dz.data(), dh_next.data());
    }
    return dx;
}

void expect_shape(const Tensor& t, const std::vector<std::size_t>& shape, std::string_view layer,
                  std::string_view what) {
    if (t.shape() != shape) {
        throw ShapeError(std::string(layer) + "." + std::string(what) + " has shape " +
                         shape_to_string(t.shape()) + ", expected " + shape_to_string(shape));
    }
}

/// Runs one sample end to end. `input` points at window * feature_dim values.
double forward_sample(const ModelParams& p, const double* input, SampleCache* cache) {
    std::vector<double> current;
    if (p.arch == Architecture::dnn) {
        current.assign(input, input + p.window);
        if (!p.standardizer.empty()) {
            for (std::size_t k = 0; k < current.size(); ++k) {
                current[k] = (current[k] - p.standardizer.mean[k]) / p.standardizer.stddev[k];
            }
        }
    } else {
        std::vector<double> seq(input, input + p.window * p.feature_dim);
        std::vector<double> hidden;
        if (cache) cache->lstm.resize(p.lstm.size());
        for (std::size_t l = 0; l < p.lstm.size(); ++l) {
            run_lstm(p.lstm[l], seq.data(), p.window, cache ? &cache->lstm[l] : nullptr, hidden);
            seq.swap(hidden);
        }
        const std::size_t u = p.lstm.back().units;
        current.assign(seq.end() - static_cast<std::ptrdiff_t>(u), seq.end());
    }
    if (cache) {
        cache->dense_inputs.resize(p.dense.size());
        cache->dense_preact.resize(p.dense.size());
    }
    for (std::size_t l = 0; l < p.dense.size(); ++l) {
        const auto& layer = p.dense[l];
        std::vector<double> z(layer.b.data(), layer.b.data() + layer.out_dim());
        gemv_acc(layer.W.data(), layer.out_dim(), layer.in_dim(), current.data(), z.data());
        std::vector<double> a(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) a[k] = activate(layer.activation, z[k], layer.alpha);
        if (cache) {
            cache->dense_inputs[l] = std::move(current);
            cache->dense_preact[l] = std::move(z);
        }
        current = std::move(a);
    }
    return current[0];
}

void check_batch(const ModelParams& params, const Tensor& batch) {
    params.validate();
    const std::size_t n = batch.rank() >= 1 ? batch.extent(0) : 0;
    const auto expected = batch_shape(params, n);
    if (batch.shape() != expected) {
        throw ShapeError(std::string(architecture_name(params.arch)) + " expects batch shape " +
                         shape_to_string(expected) + ", got " + shape_to_string(batch.shape()));
    }
}

}  // namespace

Architecture parse_architecture(std::string_view name) {
    if (name == "fused_lstm") return Architecture::fused_lstm;
    if (name == "price_lstm") return Architecture::price_lstm;
    if (name == "dnn") return Architecture::dnn;
    throw ArgumentError("unknown architecture '" + std::string(name) +
                        "' (expected fused_lstm, price_lstm or dnn)");
}

std::string_view architecture_name(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::fused_lstm: return "fused_lstm";
        case Architecture::price_lstm: return "price_lstm";
        case Architecture::dnn: return "dnn";
    }
    return "unknown";
}

std::string_view architecture_label(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::fused_lstm: return "Sentiment-fused LSTM";
        case Architecture::price_lstm: return "LSTM";
        case Architecture::dnn: return "DNN";
    }
    return "unknown";
}

void LstmLayerParams::validate(std::string_view layer) const {
    if (units == 0) throw ShapeError(std::string(layer) + " has zero units");
    if (W.rank() != 2 || W.extent(0) != 4 * units || W.extent(1) == 0) {
        throw ShapeError(std::string(layer) + ".W has shape " + shape_to_string(W.shape()) +
                         ", expected (" + std::to_string(4 * units) + ", input_dim)");
    }
    expect_shape(U, {4 * units, units}, layer, "U");
    expect_shape(b, {4 * units}, layer, "b");
}

void DenseLayerParams::validate(std::string_view layer) const {
    if (W.rank() != 2 || W.extent(0) == 0 || W.extent(1) == 0) {
        throw ShapeError(std::string(layer) + ".W has shape " + shape_to_string(W.shape()) +
                         ", expected (out_dim, in_dim)");
    }
    expect_shape(b, {W.extent(0)}, layer, "b");
}

std::vector<Tensor*> ModelParams::tensors() {
    std::vector<Tensor*> out;
    for (auto& l : lstm) out.insert(out.end(), {&l.W, &l.U, &l.b});
    for (auto& d : dense) out.insert(out.end(), {&d.W, &d.b});
    return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
    std::vector<const Tensor*> out;
    for (const auto& l : lstm) out.insert(out.end(), {&l.W, &l.U, &l.b});
    for (const auto& d : dense) out.insert(out.end(), {&d.W, &d.b});
    return out;
}

std::vector<std::string> ModelParams::tensor_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < lstm.size(); ++i) {
        const auto base = layer_name("lstm", i);
        out.insert(out.end(), {base + ".W", base + ".U", base + ".b"});
    }
    for (std::size_t i = 0; i < dense.size(); ++i) {
        const auto base = layer_name("dense", i);
        out.insert(out.end(), {base + ".W", base + ".b"});
    }
    return out;
}

TensorList ModelParams::snapshot() const {
    TensorList out;
    for (const Tensor* t : tensors()) out.push_back(*t);
    return out;
}

void ModelParams::assign(const TensorList& values) {
    auto targets = tensors();
    if (values.size() != targets.size()) {
        throw ShapeError("assign: expected " + std::to_string(targets.size()) + " tensors, got " +
                         std::to_string(values.size()));
    }
    const auto names = tensor_names();
    for (std::size_t i = 0; i < targets.size(); ++i) {
        expect_shape(values[i], targets[i]->shape(), names[i], "value");
        *targets[i] = values[i];
    }
}

TensorList ModelParams::zeros_like() const {
    TensorList out;
    for (const Tensor* t : tensors()) out.emplace_back(t->shape());
    return out;
}

void ModelParams::validate() const {
    const auto name = std::string(architecture_name(arch));
    if (window == 0) throw ShapeError(name + ": window must be positive");
    if (dense.empty()) throw ShapeError(name + ": missing dense head");
    if (arch == Architecture::dnn) {
        if (!lstm.empty()) throw ShapeError("dnn must not contain LSTM layers");
        if (feature_dim != 1) throw ShapeError("dnn expects one close per time step");
        if (!standardizer.empty() &&
            (standardizer.mean.size() != window || standardizer.stddev.size() != window)) {
            throw ShapeError("dnn standardizer must have one mean/stddev per input position");
        }
    } else {
        const std::size_t expected_features = arch == Architecture::fused_lstm ? 4 : 1;
        if (feature_dim != expected_features) {
            throw ShapeError(name + " expects feature_dim " + std::to_string(expected_features));
        }
        if (lstm.empty()) throw ShapeError(name + ": missing LSTM layers");
        std::size_t in = feature_dim;
        for (std::size_t i = 0; i < lstm.size(); ++i) {
            const auto lname = layer_name("lstm", i);
            lstm[i].validate(lname);
            if (lstm[i].input_dim() != in) {
                throw ShapeError(lname + " input_dim " + std::to_string(lstm[i].input_dim()) +
                                 " does not match upstream width " + std::to_string(in));
            }
            const bool last = i + 1 == lstm.size();
            if (lstm[i].return_sequences == last) {
                throw ShapeError(lname + (last ? " must return only its last step"
                                               : " must return the full sequence"));
            }
            in = lstm[i].units;
        }
    }
    std::size_t in = arch == Architecture::dnn ? window : lstm.back().units;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        const auto dname = layer_name("dense", i);
        dense[i].validate(dname);
        if (dense[i].in_dim() != in) {
            throw ShapeError(dname + " in_dim " + std::to_string(dense[i].in_dim()) +
                             " does not match upstream width " + std::to_string(in));
        }
        in = dense[i].out_dim();
    }
    if (in != 1 || dense.back().activation != Activation::linear) {
        throw ShapeError(name + ": head must be a single linear output");
    }
}

std::uint64_t ModelParams::fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
        h ^= h >> 29;
    };
    mix(static_cast<std::uint64_t>(arch));
    mix(window);
    mix(feature_dim);
    for (const Tensor* t : tensors()) {
        mix(t->size());
        for (double v : t->values()) mix(std::bit_cast<std::uint64_t>(v));
    }
    for (double v : standardizer.mean) mix(std::bit_cast<std::uint64_t>(v));
    for (double v : standardizer.stddev) mix(std::bit_cast<std::uint64_t>(v));
    return h;
}

ModelParams make_model(Architecture arch, Rng& rng, const ModelShape& shape) {
    ModelParams p;
    p.arch = arch;
    p.window = shape.window;
    if (arch == Architecture::dnn) {
        p.feature_dim = 1;
        std::size_t in = shape.window;
        for (std::size_t width : shape.dnn_hidden) {
            p.dense.push_back({init_params({width, in}, rng, InitScheme::glorot_uniform),
                               init_params({width}, rng, InitScheme::zeros), Activation::leaky_relu,
                               shape.leaky_alpha});
            in = width;
        }
        p.dense.push_back({init_params({1, in}, rng, InitScheme::glorot_uniform),
                           init_params({1}, rng, InitScheme::zeros), Activation::linear, 0.0});
    } else {
        p.feature_dim = arch == Architecture::fused_lstm ? 4 : 1;
        std::size_t in = p.feature_dim;
        const std::size_t u = shape.lstm_units;
        for (std::size_t l = 0; l < shape.lstm_layers; ++l) {
            p.lstm.push_back({init_params({4 * u, in}, rng, InitScheme::glorot_uniform),
                              init_params({4 * u, u}, rng, InitScheme::glorot_uniform),
                              init_params({4 * u}, rng, InitScheme::zeros), u, l + 1 < shape.lstm_layers});
            in = u;
        }
        p.dense.push_back({init_params({1, u}, rng, InitScheme::glorot_uniform),
                           init_params({1}, rng, InitScheme::zeros), Activation::linear, 0.0});
    }
    p.validate();
    return p;
}

std::size_t count_params(const ModelParams& params) {
    std::size_t n = 0;
    for (const Tensor* t : params.tensors()) n += t->size();
    return n;
}

LstmStepResult lstm_cell_step(const LstmLayerParams& params, std::span<const double> x,
                              std::span<const double> h_prev, std::span<const double> c_prev,
                              std::string_view layer) {
    params.validate(layer);
    const std::size_t u = params.units;
    if (x.size() != params.input_dim() || h_prev.size() != u || c_prev.size() != u) {
        throw ShapeError(std::string(layer) + ": step expects x of " + std::to_string(params.input_dim()) +
                         " and states of " + std::to_string(u) + " values");
    }
    LstmStepResult r;
    r.h.resize(u);
    r.c.resize(u);
    r.cache.x.assign(x.begin(), x.end());
    r.cache.h_prev.assign(h_prev.begin(), h_prev.end());
    r.cache.c_prev.assign(c_prev.begin(), c_prev.end());
    r.cache.gates.resize(4 * u);
    r.cache.tanh_c.resize(u);
    lstm_gates(params, x.data(), h_prev.data(), c_prev.data(), r.cache.gates.data(), r.c.data(),
               r.cache.tanh_c.data(), r.h.data());
    r.cache.c = r.c;
    return r;
}

Tensor lstm_forward(const LstmLayerParams& params, const Tensor& sequence, LstmSequenceCache* cache,
                    std::string_view layer) {
    params.validate(layer);
    if (sequence.rank() != 2 || sequence.extent(1) != params.input_dim()) {
        throw ShapeError(std::string(layer) + " expects a (steps, " + std::to_string(params.input_dim()) +
                         ") sequence, got " + shape_to_string(sequence.shape()));
    }
    const std::size_t steps = sequence.extent(0);
    const std::size_t u = params.units;
    std::vector<double> hidden;
    run_lstm(params, sequence.data(), steps, cache, hidden);
    if (params.return_sequences) return Tensor({steps, u}, std::move(hidden));
    if (steps == 0) return Tensor({u});
    return Tensor({u}, std::vector<double>(hidden.end() - static_cast<std::ptrdiff_t>(u), hidden.end()));
}

LstmLayerGrads lstm_backward(const LstmLayerParams& params, const LstmSequenceCache& cache,
                             const Tensor& d_output, std::string_view layer) {
    params.validate(layer);
    const std::size_t steps = cache.size();
    const std::size_t u = params.units;
    if (steps == 0) throw StateError(std::string(layer) + ": backward called without a forward cache");
    const std::vector<std::size_t> expected =
        params.return_sequences ? std::vector<std::size_t>{steps, u} : std::vector<std::size_t>{u};
    if (d_output.shape() != expected) {
        throw ShapeError(std::string(layer) + ": output gradient has shape " + shape_to_string(d_output.shape()) +
                         ", expected " + shape_to_string(expected));
    }
    std::vector<double> d_hidden(steps * u, 0.0);
    std::copy(d_output.values().begin(), d_output.values().end(),
              d_hidden.end() - static_cast<std::ptrdiff_t>(d_output.size()));
    LstmLayerGrads g{Tensor(params.W.shape()), Tensor(params.U.shape()), Tensor(params.b.shape()), Tensor()};
    auto dx = backprop_lstm(params, cache, d_hidden, g.dW, g.dU, g.db);
    g.dx = Tensor({steps, params.input_dim()}, std::move(dx));
    return g;
}

std::vector<std::size_t> batch_shape(const ModelParams& params, std::size_t n) {
    if (params.arch == Architecture::dnn) return {n, params.window};
    return {n, params.window, params.feature_dim};
}

ForwardResult model_forward(const ModelParams& params, const Tensor& batch) {
    check_batch(params, batch);
    const std::size_t n = batch.extent(0);
    const std::size_t stride = params.window * params.feature_dim;
    ForwardResult r;
    r.predictions = Tensor({n, 1});
    r.cache.arch = params.arch;
    r.cache.fingerprint = params.fingerprint();
    r.cache.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.predictions[i] = forward_sample(params, batch.data() + i * stride, &r.cache.samples[i]);
    }
    require_finite(r.predictions, "model predictions");
    r.cache.valid = true;
    return r;
}

Tensor predict(const ModelParams& params, const Tensor& batch) {
    check_batch(params, batch);
    const std::size_t n = batch.extent(0);
    const std::size_t stride = params.window * params.feature_dim;
    Tensor out({n, 1});
    for (std::size_t i = 0; i < n; ++i) out[i] = forward_sample(params, batch.data() + i * stride, nullptr);
    require_finite(out, "model predictions");
    return out;
}

TensorList model_backward(const ModelParams& params, const ForwardCache& cache, const Tensor& dloss_dpred) {
    if (!cache.valid) throw StateError("model_backward called without a forward cache");
    if (cache.arch != params.arch || cache.fingerprint != params.fingerprint()) {
        throw StateError("forward cache is stale: parameters changed since the forward pass");
    }
    const std::size_t n = cache.samples.size();
    if (dloss_dpred.shape() != std::vector<std::size_t>{n, 1}) {
        throw ShapeError("upstream gradient has shape " + shape_to_string(dloss_dpred.shape()) +
                         ", expected " + shape_to_string({n, 1}));
    }
    require_finite(dloss_dpred, "upstream gradient");

    TensorList grads = params.zeros_like();
    const std::size_t dense_offset = 3 * params.lstm.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sc = cache.samples[i];
        std::vector<double> upstream{dloss_dpred[i]};
        for (std::size_t l = params.dense.size(); l-- > 0;) {
            const auto& layer = params.dense[l];
            const auto& z = sc.dense_preact[l];
            const auto& a = sc.dense_inputs[l];
            std::vector<double> dz(z.size());
            for (std::size_t k = 0; k < z.size(); ++k) {
                dz[k] = upstream[k] * activate_derivative(layer.activation, z[k], layer.alpha);
            }
            Tensor& dW = grads[dense_offset + 2 * l];
            Tensor& db = grads[dense_offset + 2 * l + 1];
            outer_acc(dW.data(), layer.out_dim(), layer.in_dim(), dz.data(), a.data());
            for (std::size_t k = 0; k < dz.size(); ++k) db[k] += dz[k];
            upstream.assign(layer.in_dim(), 0.0);
            gemv_t_acc(layer.W.data(), layer.out_dim(), layer.in_dim(), dz.data(), upstream.data());
        }
        if (params.arch == Architecture::dnn) continue;

        const std::size_t u = params.lstm.back().units;
        std::vector<double> d_hidden(params.window * u, 0.0);
        std::copy(upstream.begin(), upstream.end(), d_hidden.end() - static_cast<std::ptrdiff_t>(u));
        for (std::size_t l = params.lstm.size(); l-- > 0;) {
            d_hidden = backprop_lstm(params.lstm[l], sc.lstm[l], d_hidden, grads[3 * l], grads[3 * l + 1],
                                     grads[3 * l + 2]);
        }
    }
    return grads;
}

}  // namespace newscast
