#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "newscast/dataset.hpp"
#include "newscast/sentiment.hpp"

namespace newscast {

/// Synthetic market: per ticker, a geometric random walk on business days.
/// On news days a mood m ~ U(-1, 1) is drawn and each headline is positive
/// with probability max(m, 0), negative with probability max(-m, 0), neutral
/// otherwise. The planted signal s = (#positive - #negative) / #headlines
/// shifts the next log return:
///   log(close[t+1] / close[t]) = drift + coupling * s[t] + volatility * z
struct SynthConfig {
    std::size_t tickers = 1;
    std::size_t bars = 260;
    Date start = Date::from_ymd(2019, 1, 2);
    double initial_price = 100.0;
    double drift = 0.0002;
    double volatility = 0.01;
    double coupling = 0.0;
    double news_probability = 0.8;
    std::size_t max_headlines = 3;
    std::uint64_t seed = 42;

    std::vector<std::string> problems() const;
};

struct SynthOutput {
    std::vector<NewsRecord> news;
    std::vector<PriceBar> bars;
    /// Planted signal per bar, aligned with `bars` (0 on days without news).
    std::vector<double> planted;
};

/// Headline words come from `lexicon`, which must hold at least one
/// positive and one negative word.
SynthOutput synthesize(const SynthConfig& cfg, const Lexicon& lexicon);

void write_news_csv(const std::filesystem::path& path, const std::vector<NewsRecord>& news);
void write_prices_csv(const std::filesystem::path& path, const std::vector<PriceBar>& bars);

}  // namespace newscast
