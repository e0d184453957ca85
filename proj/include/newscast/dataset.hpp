#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newscast/date.hpp"
#include "newscast/errors.hpp"
#include "newscast/numerics.hpp"
#include "newscast/sentiment.hpp"

namespace newscast {

inline constexpr std::size_t kDefaultWindow = 8;
inline constexpr std::size_t kMinBarsPerTicker = 10;

struct NewsRecord {
    Date date;
    std::string ticker;
    std::string title;
    std::string publisher;
    std::string url;
    std::size_t line = 0;  // source line, header is line 1
};

struct PriceBar {
    Date date;
    std::string ticker;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

/// A rejected input row: `row_number` is the file line the record starts on.
struct Reject {
    std::size_t row_number = 0;
    std::string reason;
};

template <typename T>
struct LoadResult {
    std::vector<T> records;
    std::vector<Reject> rejects;
};

struct NewsLoadOptions {
    std::optional<Date> earliest;
    std::optional<Date> latest;
};

/// Header must contain date,ticker,title,publisher,url (any order).
LoadResult<NewsRecord> load_news(const std::filesystem::path& path, const NewsLoadOptions& options = {});
LoadResult<NewsRecord> parse_news(std::string_view text, const NewsLoadOptions& options = {});

/// Header must contain date,ticker,open,high,low,close,volume (any order).
/// Output is sorted by (ticker, date). A repeated (date, ticker) pair throws
/// FormatError.
LoadResult<PriceBar> load_prices(const std::filesystem::path& path);
LoadResult<PriceBar> parse_prices(std::string_view text);

/// CSV `row_number,reason`.
void write_rejects(const std::filesystem::path& path, const std::vector<Reject>& rejects);

std::map<std::string, std::vector<PriceBar>> group_by_ticker(const std::vector<PriceBar>& bars);

/// Moves each headline onto the first trading day (of its ticker) on or after
/// its publication date. Headlines for unknown tickers or after the last bar
/// are dropped and counted.
struct AlignmentResult {
    std::vector<ScoredHeadline> aligned;
    std::size_t dropped = 0;
};
AlignmentResult align_to_trading_days(std::vector<ScoredHeadline> scored,
                                      const std::map<std::string, std::vector<PriceBar>>& bars_by_ticker);

struct SplitSpec {
    double train_fraction = 0.85;
    double val_fraction_of_train = 0.15;

    void validate() const;
};

struct SplitCounts {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;

    std::size_t total() const noexcept { return train + validation + test; }
    SplitCounts& operator+=(const SplitCounts& o) noexcept {
        train += o.train;
        validation += o.validation;
        test += o.test;
        return *this;
    }
    friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// floor(train_fraction * n) records to train+validation, then
/// floor((1 - val_fraction_of_train) * m) of those to train.
SplitCounts plan_split(std::size_t n, const SplitSpec& spec);

template <typename T>
struct SplitParts {
    std::vector<T> train;
    std::vector<T> validation;
    std::vector<T> test;
};

template <typename T>
struct StratifiedSplit {
    std::map<std::string, SplitParts<T>> per_ticker;
    SplitCounts totals;
    std::vector<std::string> excluded;
    std::vector<std::string> warnings;
};

/// Chronological per-ticker split. Each ticker's records must already be in
/// non-decreasing date order. Tickers with fewer than kMinBarsPerTicker
/// records are excluded with a warning.
template <typename T>
StratifiedSplit<T> stratified_split(const std::map<std::string, std::vector<T>>& by_ticker,
                                    const SplitSpec& spec = {}) {
    spec.validate();
    StratifiedSplit<T> out;
    for (const auto& [ticker, records] : by_ticker) {
        for (std::size_t i = 1; i < records.size(); ++i) {
            if (records[i].date < records[i - 1].date) {
                throw ArgumentError("stratified_split: records for '" + ticker + "' are not sorted by date");
            }
        }
        if (records.size() < kMinBarsPerTicker) {
            out.excluded.push_back(ticker);
            out.warnings.push_back("ticker '" + ticker + "' has " + std::to_string(records.size()) +
                                   " records (< " + std::to_string(kMinBarsPerTicker) + "), excluded");
            continue;
        }
        const SplitCounts counts = plan_split(records.size(), spec);
        auto& parts = out.per_ticker[ticker];
        const auto first = records.begin();
        parts.train.assign(first, first + counts.train);
        parts.validation.assign(first + counts.train, first + counts.train + counts.validation);
        parts.test.assign(first + counts.train + counts.validation, records.end());
        out.totals += counts;
    }
    return out;
}

struct MinMaxScaler {
    double min = 0.0;
    double max = 1.0;

    /// Values outside the fitted range map outside [0, 1]; that is expected
    /// for validation and test data.
    double normalize(double x) const noexcept { return (x - min) / (max - min); }
    double denormalize(double y) const noexcept { return y * (max - min) + min; }

    friend bool operator==(const MinMaxScaler&, const MinMaxScaler&) = default;
};

/// Throws ArgumentError for fewer than 2 values and DegenerateSeriesError for
/// a constant series.
MinMaxScaler fit_minmax(std::span<const double> values);

/// One ticker's closes, normalized with a fixed scaler.
struct NormalizedSeries {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> closes;      // currency units
    std::vector<double> normalized;  // scaler applied
    MinMaxScaler scaler;

    static NormalizedSeries from_bars(std::span<const PriceBar> bars, const MinMaxScaler& scaler);
    std::size_t size() const noexcept { return closes.size(); }
};

struct WindowSample {
    Tensor inputs;              // (window, features)
    double target = 0.0;        // normalized close at target_index
    double target_close = 0.0;  // same close in currency units
    std::string ticker;
    Date target_date;
    std::size_t target_index = 0;
    /// Day whose aggregated sentiment fills the fused block (input step t-1).
    std::optional<Date> sentiment_date;
    bool sentiment_present = false;
};

/// Sample for the target at `target_index`: inputs are steps
/// [target_index - window, target_index). With `sentiment`, every step holds
/// the sentiment of the most recent input day in features 0-2 and the
/// normalized close in feature 3; otherwise one feature per step.
WindowSample make_window(const NormalizedSeries& series, std::size_t target_index,
                         const SentimentLookup* sentiment, std::size_t window = kDefaultWindow);

/// All samples with targets at indices window..n-1 (empty when n <= window).
std::vector<WindowSample> build_windows(const NormalizedSeries& series, const SentimentLookup* sentiment,
                                        std::size_t window = kDefaultWindow);

/// Per-ticker windows assigned to the split that owns their target day.
/// Validation and test targets draw on the preceding actual closes as context.
struct WindowedDataset {
    std::vector<WindowSample> train;
    std::vector<WindowSample> validation;
    std::vector<WindowSample> test;
    std::map<std::string, MinMaxScaler> scalers;
    std::map<std::string, NormalizedSeries> series;
    std::map<std::string, SplitCounts> bar_counts;
    SplitCounts bar_totals;
    std::vector<std::string> warnings;
};

struct WindowOptions {
    SplitSpec split;
    std::size_t window = kDefaultWindow;
    bool fused = false;
    /// When set, reuse these scalers instead of fitting on the training bars.
    const std::map<std::string, MinMaxScaler>* scalers = nullptr;
};

WindowedDataset prepare_windows(const std::map<std::string, std::vector<PriceBar>>& bars_by_ticker,
                                const SentimentLookup* sentiment, const WindowOptions& options);

}  // namespace newscast
