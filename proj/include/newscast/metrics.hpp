#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "newscast/checkpoint.hpp"
#include "newscast/dataset.hpp"
#include "newscast/models.hpp"

namespace newscast {

/// mean |pred_i - actual_i|. Throws ArgumentError on empty or unequal input.
double mae(std::span<const double> pred, std::span<const double> actual);

/// mean |(pred_i - actual_i) / actual_i|. Throws DivisionByZeroError naming
/// the first index whose actual value is zero.
double mape(std::span<const double> pred, std::span<const double> actual);

/// 1 - mape; negative when MAPE exceeds 1.
inline double accuracy(double mape_value) noexcept { return 1.0 - mape_value; }

/// One row of the model comparison table. testing_loss is MSE in normalized
/// units; mae is in price units; mape and accuracy are ratios.
struct EvalReport {
    Architecture approach = Architecture::fused_lstm;
    double testing_loss = 0.0;
    double mae = 0.0;
    double mape = 0.0;
    double accuracy = 0.0;

    bool accuracy_negative() const noexcept { return accuracy < 0.0; }
};

struct PredictionRow {
    std::string ticker;
    Date date;
    double predicted_close = 0.0;
    double actual_close = 0.0;
    double predicted_normalized = 0.0;
    double target_normalized = 0.0;
};

struct Evaluation {
    EvalReport report;
    std::vector<PredictionRow> predictions;
};

/// Scores `test` with the checkpointed model: MSE on normalized values,
/// MAE/MAPE on predictions denormalized with each sample's ticker scaler.
Evaluation evaluate(const Checkpoint& checkpoint, std::span<const WindowSample> test);

/// Column headers, in table order.
std::vector<std::string> report_columns();

/// CSV with one row per report.
void write_report_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports);
/// Fixed-width text table with a units legend.
std::string format_report_table(const std::vector<EvalReport>& reports);

/// CSV `ticker,date,predicted_close,actual_close,predicted_normalized,target_normalized`
/// with round-trip precision.
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions(const std::filesystem::path& path);

}  // namespace newscast
