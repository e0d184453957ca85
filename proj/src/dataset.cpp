#include "newscast/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "newscast/csv.hpp"

namespace newscast {

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string trimmed(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return std::string(s);
}

/// Maps each required column name to its index in the header row.
std::vector<std::size_t> resolve_columns(const std::vector<csv::Row>& rows,
                                         std::initializer_list<std::string_view> required,
                                         std::string_view what) {
    if (rows.empty()) throw FormatError(std::string(what) + " file has no header row", 1);
    std::unordered_map<std::string, std::size_t> index;
    const auto& header = rows.front().fields;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name = trimmed(header[i]);
        // Tolerate a UTF-8 byte-order mark on the first column.
        if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        index.emplace(std::move(name), i);
    }
    std::vector<std::size_t> columns;
    for (auto name : required) {
        const auto it = index.find(std::string(name));
        if (it == index.end()) {
            throw FormatError(std::string(what) + " file is missing required column '" +
                                  std::string(name) + "'",
                              rows.front().line);
        }
        columns.push_back(it->second);
    }
    return columns;
}

}  // namespace

LoadResult<NewsRecord> parse_news(std::string_view text, const NewsLoadOptions& options) {
    const auto rows = csv::parse(text);
    const auto col = resolve_columns(rows, {"date", "ticker", "title", "publisher", "url"}, "news");
    const std::size_t width = rows.front().fields.size();

    LoadResult<NewsRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != width) {
            out.rejects.push_back({row.line, "wrong field count"});
            continue;
        }
        const auto date = Date::parse(trimmed(row.fields[col[0]]));
        if (!date) {
            out.rejects.push_back({row.line, "bad date"});
            continue;
        }
        if ((options.earliest && *date < *options.earliest) || (options.latest && *date > *options.latest)) {
            out.rejects.push_back({row.line, "date out of range"});
            continue;
        }
        std::string ticker = trimmed(row.fields[col[1]]);
        if (ticker.empty()) {
            out.rejects.push_back({row.line, "empty ticker"});
            continue;
        }
        out.records.push_back({*date, std::move(ticker), row.fields[col[2]], row.fields[col[3]],
                               row.fields[col[4]], row.line});
    }
    return out;
}

LoadResult<NewsRecord> load_news(const std::filesystem::path& path, const NewsLoadOptions& options) {
    return parse_news(read_text(path), options);
}

LoadResult<PriceBar> parse_prices(std::string_view text) {
    const auto rows = csv::parse(text);
    const auto col =
        resolve_columns(rows, {"date", "ticker", "open", "high", "low", "close", "volume"}, "price");
    const std::size_t width = rows.front().fields.size();

    LoadResult<PriceBar> out;
    std::map<std::pair<std::string, Date>, std::size_t> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != width) {
            out.rejects.push_back({row.line, "wrong field count"});
            continue;
        }
        const auto date = Date::parse(trimmed(row.fields[col[0]]));
        if (!date) {
            out.rejects.push_back({row.line, "bad date"});
            continue;
        }
        std::string ticker = trimmed(row.fields[col[1]]);
        if (ticker.empty()) {
            out.rejects.push_back({row.line, "empty ticker"});
            continue;
        }
        PriceBar bar{*date, ticker};
        static constexpr std::string_view names[] = {"open", "high", "low", "close", "volume"};
        double* slots[] = {&bar.open, &bar.high, &bar.low, &bar.close, &bar.volume};
        std::string bad;
        for (std::size_t k = 0; k < 5; ++k) {
            if (!csv::parse_real(row.fields[col[k + 2]], *slots[k])) {
                bad = "bad " + std::string(names[k]);
                break;
            }
        }
        if (!bad.empty()) {
            out.rejects.push_back({row.line, bad});
            continue;
        }
        if (bar.close <= 0.0) {
            out.rejects.push_back({row.line, "non-positive close"});
            continue;
        }
        const auto [it, inserted] = seen.emplace(std::pair{ticker, *date}, row.line);
        if (!inserted) {
            throw FormatError("duplicate price row for " + ticker + " on " + date->to_string() +
                                  " (first seen on line " + std::to_string(it->second) + ")",
                              row.line);
        }
        out.records.push_back(std::move(bar));
    }
    std::sort(out.records.begin(), out.records.end(), [](const PriceBar& a, const PriceBar& b) {
        return std::tie(a.ticker, a.date) < std::tie(b.ticker, b.date);
    });
    return out;
}

LoadResult<PriceBar> load_prices(const std::filesystem::path& path) {
    return parse_prices(read_text(path));
}

void write_rejects(const std::filesystem::path& path, const std::vector<Reject>& rejects) {
    std::ostringstream out;
    csv::write_row(out, {"row_number", "reason"});
    for (const auto& r : rejects) csv::write_row(out, {std::to_string(r.row_number), r.reason});
    csv::write_atomic(path, out.str());
}

std::map<std::string, std::vector<PriceBar>> group_by_ticker(const std::vector<PriceBar>& bars) {
    std::map<std::string, std::vector<PriceBar>> out;
    for (const auto& bar : bars) out[bar.ticker].push_back(bar);
    for (auto& [ticker, series] : out) {
        std::sort(series.begin(), series.end(),
                  [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
    }
    return out;
}

AlignmentResult align_to_trading_days(std::vector<ScoredHeadline> scored,
                                      const std::map<std::string, std::vector<PriceBar>>& bars_by_ticker) {
    AlignmentResult out;
    out.aligned.reserve(scored.size());
    for (auto& s : scored) {
        const auto it = bars_by_ticker.find(s.ticker);
        if (it == bars_by_ticker.end()) {
            ++out.dropped;
            continue;
        }
        const auto& bars = it->second;
        const auto pos = std::lower_bound(bars.begin(), bars.end(), s.date,
                                          [](const PriceBar& b, Date d) { return b.date < d; });
        if (pos == bars.end()) {
            ++out.dropped;
            continue;
        }
        s.date = pos->date;
        out.aligned.push_back(std::move(s));
    }
    return out;
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ArgumentError("train_fraction must lie in (0, 1)");
    }
    if (!(val_fraction_of_train > 0.0 && val_fraction_of_train < 1.0)) {
        throw ArgumentError("val_fraction_of_train must lie in (0, 1)");
    }
}

SplitCounts plan_split(std::size_t n, const SplitSpec& spec) {
    // The small nudge keeps exact products such as 0.85 * 100 from flooring
    // to 84 through binary rounding.
    auto floor_share = [](double fraction, std::size_t count) {
        return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(count) + 1e-9));
    };
    const std::size_t train_val = floor_share(spec.train_fraction, n);
    const std::size_t train = floor_share(1.0 - spec.val_fraction_of_train, train_val);
    return {train, train_val - train, n - train_val};
}

MinMaxScaler fit_minmax(std::span<const double> values) {
    if (values.size() < 2) throw ArgumentError("fit_minmax needs at least 2 values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) throw DegenerateSeriesError("cannot min-max scale a constant series");
    return {*lo, *hi};
}

NormalizedSeries NormalizedSeries::from_bars(std::span<const PriceBar> bars, const MinMaxScaler& scaler) {
    NormalizedSeries s;
    s.scaler = scaler;
    if (!bars.empty()) s.ticker = bars.front().ticker;
    for (const auto& b : bars) {
        s.dates.push_back(b.date);
        s.closes.push_back(b.close);
        s.normalized.push_back(scaler.normalize(b.close));
    }
    return s;
}

WindowSample make_window(const NormalizedSeries& series, std::size_t target_index,
                         const SentimentLookup* sentiment, std::size_t window) {
    if (window == 0) throw ArgumentError("window must be positive");
    if (target_index < window || target_index >= series.size()) {
        throw ArgumentError("target index " + std::to_string(target_index) + " needs " +
                            std::to_string(window) + " preceding closes in a series of " +
                            std::to_string(series.size()));
    }
    const std::size_t features = sentiment ? 4 : 1;
    WindowSample sample;
    sample.inputs = Tensor({window, features});
    sample.target = series.normalized[target_index];
    sample.target_close = series.closes[target_index];
    sample.ticker = series.ticker;
    sample.target_date = series.dates[target_index];
    sample.target_index = target_index;

    std::array<double, 3> block{};
    if (sentiment) {
        const Date day = series.dates[target_index - 1];
        const auto found = sentiment->find(series.ticker, day);
        sample.sentiment_date = day;
        sample.sentiment_present = found.has_value();
        block = found.value_or(SentimentDistribution::uniform()).as_array();
    }
    const std::size_t start = target_index - window;
    for (std::size_t step = 0; step < window; ++step) {
        if (sentiment) {
            sample.inputs.at(step, 0) = block[0];
            sample.inputs.at(step, 1) = block[1];
            sample.inputs.at(step, 2) = block[2];
            sample.inputs.at(step, 3) = series.normalized[start + step];
        } else {
            sample.inputs.at(step, 0) = series.normalized[start + step];
        }
    }
    return sample;
}

std::vector<WindowSample> build_windows(const NormalizedSeries& series, const SentimentLookup* sentiment,
                                        std::size_t window) {
    std::vector<WindowSample> out;
    for (std::size_t t = window; t < series.size(); ++t) {
        out.push_back(make_window(series, t, sentiment, window));
    }
    return out;
}

WindowedDataset prepare_windows(const std::map<std::string, std::vector<PriceBar>>& bars_by_ticker,
                                const SentimentLookup* sentiment, const WindowOptions& options) {
    const SentimentLookup empty;
    const SentimentLookup* lookup = options.fused ? (sentiment ? sentiment : &empty) : nullptr;

    WindowedDataset data;
    const auto split = stratified_split(bars_by_ticker, options.split);
    data.warnings = split.warnings;
    data.bar_totals = split.totals;

    for (const auto& [ticker, parts] : split.per_ticker) {
        const auto& bars = bars_by_ticker.at(ticker);
        MinMaxScaler scaler;
        if (options.scalers) {
            const auto it = options.scalers->find(ticker);
            if (it == options.scalers->end()) {
                throw ArgumentError("no stored scaler for ticker '" + ticker + "'");
            }
            scaler = it->second;
        } else {
            std::vector<double> train_closes;
            for (const auto& b : parts.train) train_closes.push_back(b.close);
            scaler = fit_minmax(train_closes);
        }
        data.scalers[ticker] = scaler;
        const SplitCounts counts{parts.train.size(), parts.validation.size(), parts.test.size()};
        data.bar_counts[ticker] = counts;

        auto series = NormalizedSeries::from_bars(bars, scaler);
        for (std::size_t t = options.window; t < series.size(); ++t) {
            auto sample = make_window(series, t, lookup, options.window);
            if (t < counts.train) {
                data.train.push_back(std::move(sample));
            } else if (t < counts.train + counts.validation) {
                data.validation.push_back(std::move(sample));
            } else {
                data.test.push_back(std::move(sample));
            }
        }
        data.series.emplace(ticker, std::move(series));
    }
    return data;
}

}  // namespace newscast
