#include "newscast/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"
#include "newscast/training.hpp"

namespace newscast {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> actual, const char* what) {
    if (pred.empty()) throw ArgumentError(std::string(what) + " of an empty series");
    if (pred.size() != actual.size()) {
        throw ArgumentError(std::string(what) + ": " + std::to_string(pred.size()) + " predictions vs " +
                            std::to_string(actual.size()) + " actuals");
    }
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> actual) {
    check_pair(pred, actual, "mae");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - actual[i]);
    return total / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> actual) {
    check_pair(pred, actual, "mape");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (actual[i] == 0.0) throw DivisionByZeroError("mape: actual value at index " + std::to_string(i) + " is zero");
        total += std::abs((pred[i] - actual[i]) / actual[i]);
    }
    return total / static_cast<double>(pred.size());
}

Evaluation evaluate(const Checkpoint& checkpoint, std::span<const WindowSample> test) {
    if (test.empty()) throw ArgumentError("evaluate: test set is empty");
    const auto& params = checkpoint.params;
    const Tensor pred = predict(params, make_batch(params, test));
    const Tensor target = make_targets(test);

    Evaluation ev;
    ev.report.approach = params.arch;
    ev.report.testing_loss = mse_loss(pred, target).loss;

    std::vector<double> predicted_close, actual_close;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto it = checkpoint.scalers.find(test[i].ticker);
        if (it == checkpoint.scalers.end()) {
            throw ArgumentError("evaluate: checkpoint has no scaler for '" + test[i].ticker + "'");
        }
        const double p = it->second.denormalize(pred[i]);
        predicted_close.push_back(p);
        actual_close.push_back(test[i].target_close);
        ev.predictions.push_back({test[i].ticker, test[i].target_date, p, test[i].target_close, pred[i], target[i]});
    }
    ev.report.mae = mae(predicted_close, actual_close);
    ev.report.mape = mape(predicted_close, actual_close);
    ev.report.accuracy = accuracy(ev.report.mape);
    return ev;
}

std::vector<std::string> report_columns() {
    return {"Approach", "Testing loss", "MAE", "MAPE", "Accuracy"};
}

void write_report_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    csv::write_row(out, report_columns());
    for (const auto& r : reports) {
        csv::write_row(out, {std::string(architecture_name(r.approach)), csv::format_real(r.testing_loss),
                             csv::format_real(r.mae), csv::format_real(r.mape), csv::format_real(r.accuracy)});
    }
    csv::write_atomic(path, out.str());
}

std::string format_report_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "# Testing loss: MSE on min-max normalized closes. MAE: price units. MAPE, Accuracy: ratios.\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %14s %14s %10s %10s\n", "Approach", "Testing loss", "MAE", "MAPE",
                  "Accuracy");
    out << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-22s %14.6g %14.4f %10.4f %10.4f%s\n",
                      std::string(architecture_label(r.approach)).c_str(), r.testing_loss, r.mae, r.mape,
                      r.accuracy, r.accuracy_negative() ? "  (MAPE > 1)" : "");
        out << line;
    }
    return out.str();
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRow>& rows) {
    std::ostringstream out;
    csv::write_row(out, {"ticker", "date", "predicted_close", "actual_close", "predicted_normalized",
                         "target_normalized"});
    for (const auto& r : rows) {
        csv::write_row(out, {r.ticker, r.date.to_string(), csv::format_real(r.predicted_close),
                             csv::format_real(r.actual_close), csv::format_real(r.predicted_normalized),
                             csv::format_real(r.target_normalized)});
    }
    csv::write_atomic(path, out.str());
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw FormatError("prediction file has no header", 1);
    std::vector<PredictionRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        PredictionRow r;
        const auto date = f.size() == 6 ? Date::parse(f[1]) : std::nullopt;
        if (!date || !csv::parse_real(f[2], r.predicted_close) || !csv::parse_real(f[3], r.actual_close) ||
            !csv::parse_real(f[4], r.predicted_normalized) || !csv::parse_real(f[5], r.target_normalized)) {
            throw FormatError("malformed prediction row", rows[i].line);
        }
        r.ticker = f[0];
        r.date = *date;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace newscast
