#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "newscast/config.hpp"
#include "newscast/dataset.hpp"
#include "newscast/metrics.hpp"
#include "newscast/sentiment.hpp"
#include "newscast/training.hpp"

namespace newscast {

/// Scores every headline, moves it to its ticker's next trading day and
/// averages per (date, ticker).
struct ScoredNews {
    std::vector<DailySentiment> daily;
    std::size_t headlines = 0;
    std::size_t dropped = 0;
};
ScoredNews score_news(const std::vector<NewsRecord>& news, const SentimentScorer& scorer, std::size_t max_len,
                      const std::map<std::string, std::vector<PriceBar>>& bars_by_ticker);

struct PreparedData {
    std::map<std::string, std::vector<PriceBar>> bars;
    std::vector<Reject> news_rejects;
    std::vector<Reject> price_rejects;
    ScoredNews news;
    SentimentLookup sentiment;
    WindowedDataset windows;
};

/// Loads the configured CSVs and lexicon and builds windows for `arch`.
/// `scalers` (from a checkpoint) replaces fitting when given.
PreparedData prepare_data(const RunConfig& config, Architecture arch, std::size_t window,
                          const std::map<std::string, MinMaxScaler>* scalers = nullptr);

/// Throws ConfigError listing every problem when the config is invalid.
void require_valid(const RunConfig& config);

struct SynthFiles {
    std::filesystem::path news;
    std::filesystem::path prices;
};
SynthFiles run_synth(const RunConfig& config, std::ostream& log);

struct IngestSummary {
    std::size_t news_records = 0;
    std::size_t price_records = 0;
    std::size_t daily_rows = 0;
    SplitCounts bar_totals;
};
IngestSummary run_ingest(const RunConfig& config, std::ostream& log);

TrainResult run_train(const RunConfig& config, std::ostream& log);
Evaluation run_evaluate(const RunConfig& config, std::ostream& log);
ForecastResult run_forecast(const RunConfig& config, std::ostream& log);
std::filesystem::path run_plot(const RunConfig& config, std::ostream& log);
/// Trains and evaluates all three architectures, one report row each in
/// table order (fused_lstm, price_lstm, dnn).
std::vector<EvalReport> run_compare(const RunConfig& config, std::ostream& log);

/// Checkpoint for `config.arch`, or ArchitectureMismatchError.
Checkpoint load_matching_checkpoint(const RunConfig& config);

}  // namespace newscast
