#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newscast/checkpoint.hpp"
#include "newscast/dataset.hpp"
#include "newscast/models.hpp"
#include "newscast/numerics.hpp"

namespace newscast {

struct MseResult {
    double loss = 0.0;
    Tensor grad;  // dLoss/dPred, same shape as pred
};

/// loss = mean((pred - target)^2), grad = 2 (pred - target) / N.
MseResult mse_loss(const Tensor& pred, const Tensor& target);

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    TensorList m;
    TensorList v;
    std::uint64_t t = 0;
    AdamConfig config;

    static AdamState for_params(const ModelParams& params, const AdamConfig& config = {});
};

/// One bias-corrected Adam update. Throws NumericError naming the block when
/// a gradient is not finite; parameters are untouched in that case.
void adam_step(std::span<Tensor* const> params, const TensorList& grads, AdamState& state,
               std::span<const std::string> names = {});
void adam_step(ModelParams& params, const TensorList& grads, AdamState& state);

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
    std::optional<double> clip_norm;
    bool shuffle_each_epoch = true;
    AdamConfig adam;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    Checkpoint best;
    std::vector<EpochRecord> history;
    double initial_val_loss = 0.0;
    ModelParams final_params;
};

/// Model input batch for `samples` in the layout the architecture expects.
Tensor make_batch(const ModelParams& params, std::span<const WindowSample> samples);
Tensor make_targets(std::span<const WindowSample> samples);

/// Full-set normalized MSE.
double evaluate_mse(const ModelParams& params, std::span<const WindowSample> samples);

/// Per-position mean and standard deviation of the training windows; a zero
/// deviation is replaced by 1.
InputStandardizer fit_standardizer(std::span<const WindowSample> samples, std::size_t window);

/// Runs exactly cfg.epochs epochs of mini-batch Adam on mean MSE and keeps the
/// parameters with the strictly lowest validation loss (earliest on ties).
/// A dnn model without a standardizer gets one fitted on `train_set` first.
TrainResult train(ModelParams model, std::span<const WindowSample> train_set,
                  std::span<const WindowSample> validation_set, const TrainConfig& cfg,
                  const std::map<std::string, MinMaxScaler>& scalers = {});

/// CSV `epoch,train_loss,val_loss`.
void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

struct ForecastRow {
    Date date;
    double predicted_close = 0.0;
    double actual_close = 0.0;
    double predicted_normalized = 0.0;
};

struct ForecastResult {
    std::vector<ForecastRow> rows;
    std::vector<std::string> warnings;
};

/// Walk-forward one-step-ahead forecast over `bars` (one ticker, sorted),
/// starting at `first_index`. Each prediction reads the previous `window`
/// actual closes, never earlier predictions. Horizons longer than the
/// remaining actuals are truncated with a warning.
ForecastResult rolling_forecast(const Checkpoint& checkpoint, std::span<const PriceBar> bars,
                                std::size_t first_index, const SentimentLookup* sentiment,
                                std::size_t horizon = 100);

/// CSV `date,predicted_close,actual_close`.
void write_forecast(const std::filesystem::path& path, const std::vector<ForecastRow>& rows);

}  // namespace newscast
