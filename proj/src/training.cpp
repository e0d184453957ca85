#include "newscast/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"

namespace newscast {

MseResult mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) {
        throw ShapeError("mse_loss: prediction shape " + shape_to_string(pred.shape()) +
                         " differs from target shape " + shape_to_string(target.shape()));
    }
    if (pred.empty()) throw ShapeError("mse_loss needs at least one prediction");
    const auto n = static_cast<double>(pred.size());
    MseResult r{0.0, Tensor(pred.shape())};
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - target[i];
        r.loss += diff * diff;
        r.grad[i] = 2.0 * diff / n;
    }
    r.loss /= n;
    return r;
}

AdamState AdamState::for_params(const ModelParams& params, const AdamConfig& config) {
    AdamState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.config = config;
    return s;
}

void adam_step(std::span<Tensor* const> params, const TensorList& grads, AdamState& state,
               std::span<const std::string> names) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError("adam_step: parameter, gradient and moment lists differ in length");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto label = k < names.size() ? names[k] : "block " + std::to_string(k);
        if (!grads[k].same_shape(*params[k]) || !state.m[k].same_shape(*params[k]) ||
            !state.v[k].same_shape(*params[k])) {
            throw ShapeError("adam_step: shape mismatch in " + label);
        }
        if (!grads[k].all_finite()) throw NumericError("adam_step: non-finite gradient in " + label);
    }

    const auto& c = state.config;
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = grads[k];
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

void adam_step(ModelParams& params, const TensorList& grads, AdamState& state) {
    const auto names = params.tensor_names();
    const auto tensors = params.tensors();
    adam_step(tensors, grads, state, names);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be at least 1");
    if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
    if (clip_norm && !(*clip_norm > 0.0)) throw ArgumentError("clip_norm must be positive");
    if (!(adam.learning_rate >= 0.0)) throw ArgumentError("learning rate must be non-negative");
}

Tensor make_batch(const ModelParams& params, std::span<const WindowSample> samples) {
    Tensor batch(batch_shape(params, samples.size()));
    const std::size_t stride = params.window * params.feature_dim;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& in = samples[i].inputs;
        if (in.size() != stride || in.extent(0) != params.window) {
            throw ShapeError(std::string(architecture_name(params.arch)) + " expects samples of shape (" +
                             std::to_string(params.window) + ", " + std::to_string(params.feature_dim) +
                             "), got " + shape_to_string(in.shape()));
        }
        std::copy(in.data(), in.data() + stride, batch.data() + i * stride);
    }
    return batch;
}

Tensor make_targets(std::span<const WindowSample> samples) {
    Tensor t({samples.size(), 1});
    for (std::size_t i = 0; i < samples.size(); ++i) t[i] = samples[i].target;
    return t;
}

double evaluate_mse(const ModelParams& params, std::span<const WindowSample> samples) {
    return mse_loss(predict(params, make_batch(params, samples)), make_targets(samples)).loss;
}

InputStandardizer fit_standardizer(std::span<const WindowSample> samples, std::size_t window) {
    if (samples.empty()) throw ArgumentError("fit_standardizer needs at least one sample");
    InputStandardizer s;
    s.mean.assign(window, 0.0);
    s.stddev.assign(window, 0.0);
    const auto n = static_cast<double>(samples.size());
    for (const auto& sample : samples) {
        for (std::size_t k = 0; k < window; ++k) s.mean[k] += sample.inputs[k];
    }
    for (auto& m : s.mean) m /= n;
    for (const auto& sample : samples) {
        for (std::size_t k = 0; k < window; ++k) {
            const double d = sample.inputs[k] - s.mean[k];
            s.stddev[k] += d * d;
        }
    }
    for (auto& sd : s.stddev) {
        sd = std::sqrt(sd / n);
        if (!(sd > 0.0)) sd = 1.0;
    }
    return s;
}

namespace {

void clip_gradients(TensorList& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads) {
        for (double v : g.values()) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (auto& g : grads) {
        for (double& v : g.values()) v *= scale;
    }
}

}  // namespace

TrainResult train(ModelParams model, std::span<const WindowSample> train_set,
                  std::span<const WindowSample> validation_set, const TrainConfig& cfg,
                  const std::map<std::string, MinMaxScaler>& scalers) {
    cfg.validate();
    if (train_set.empty()) throw ArgumentError("training set is empty");
    if (validation_set.empty()) throw ArgumentError("validation set is empty");
    if (model.arch == Architecture::dnn && model.standardizer.empty()) {
        model.standardizer = fit_standardizer(train_set, model.window);
    }
    model.validate();

    const Tensor val_batch = make_batch(model, validation_set);
    const Tensor val_targets = make_targets(validation_set);
    auto validation_loss = [&](const ModelParams& p) { return mse_loss(predict(p, val_batch), val_targets).loss; };

    TrainResult result;
    result.initial_val_loss = validation_loss(model);
    result.best.scalers = scalers;
    result.best.seed = cfg.seed;
    bool have_best = false;

    AdamState adam = AdamState::for_params(model, cfg.adam);
    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<WindowSample> batch_samples;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle_each_epoch) shuffle_rng.shuffle(order);
        double weighted_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            batch_samples.clear();
            for (std::size_t i = start; i < stop; ++i) batch_samples.push_back(train_set[order[i]]);

            auto forward = model_forward(model, make_batch(model, batch_samples));
            const auto mse = mse_loss(forward.predictions, make_targets(batch_samples));
            if (!std::isfinite(mse.loss)) {
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index));
            }
            auto grads = model_backward(model, forward.cache, mse.grad);
            if (cfg.clip_norm) clip_gradients(grads, *cfg.clip_norm);
            adam_step(model, grads, adam);
            weighted_loss += mse.loss * static_cast<double>(stop - start);
        }

        const double val = validation_loss(model);
        if (!std::isfinite(val)) {
            throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
        }
        result.history.push_back({epoch, weighted_loss / static_cast<double>(order.size()), val});
        if (!have_best || val < result.best.validation_loss) {
            result.best.params = model;
            result.best.epoch = epoch;
            result.best.validation_loss = val;
            have_best = true;
        }
    }
    result.final_params = std::move(model);
    return result;
}

void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
    std::ostringstream out;
    csv::write_row(out, {"epoch", "train_loss", "val_loss"});
    for (const auto& h : history) {
        csv::write_row(out, {std::to_string(h.epoch), csv::format_real(h.train_loss), csv::format_real(h.val_loss)});
    }
    csv::write_atomic(path, out.str());
}

ForecastResult rolling_forecast(const Checkpoint& checkpoint, std::span<const PriceBar> bars,
                                std::size_t first_index, const SentimentLookup* sentiment,
                                std::size_t horizon) {
    const auto& params = checkpoint.params;
    const std::size_t window = params.window;
    ForecastResult out;
    if (horizon == 0) return out;
    if (bars.empty()) throw ArgumentError("rolling_forecast: no price bars");
    if (first_index < window) {
        throw ArgumentError("rolling_forecast: first forecast needs " + std::to_string(window) +
                            " closes of context, only " + std::to_string(first_index) + " available");
    }
    if (first_index >= bars.size()) {
        throw ArgumentError("rolling_forecast: no actual closes at or after the first forecast index");
    }
    const auto& ticker = bars.front().ticker;
    const auto scaler = checkpoint.scalers.find(ticker);
    if (scaler == checkpoint.scalers.end()) {
        throw ArgumentError("rolling_forecast: checkpoint has no scaler for '" + ticker + "'");
    }

    const std::size_t available = bars.size() - first_index;
    if (horizon > available) {
        out.warnings.push_back("horizon " + std::to_string(horizon) + " exceeds the " + std::to_string(available) +
                               " available actual closes; truncated");
        horizon = available;
    }

    const SentimentLookup empty;
    const SentimentLookup* lookup =
        params.arch == Architecture::fused_lstm ? (sentiment ? sentiment : &empty) : nullptr;
    const auto series = NormalizedSeries::from_bars(bars, scaler->second);
    for (std::size_t t = first_index; t < first_index + horizon; ++t) {
        const auto sample = make_window(series, t, lookup, window);
        const double y = predict(params, make_batch(params, std::span(&sample, 1)))[0];
        out.rows.push_back({sample.target_date, scaler->second.denormalize(y), sample.target_close, y});
    }
    return out;
}

void write_forecast(const std::filesystem::path& path, const std::vector<ForecastRow>& rows) {
    std::ostringstream out;
    csv::write_row(out, {"date", "predicted_close", "actual_close"});
    for (const auto& r : rows) {
        csv::write_row(out, {r.date.to_string(), csv::format_real(r.predicted_close), csv::format_real(r.actual_close)});
    }
    csv::write_atomic(path, out.str());
}

}  // namespace newscast
