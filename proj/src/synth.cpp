#include "newscast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"

namespace newscast {

namespace {

// Not in the starter lexicon; carry no sentiment under the lexicon scorer.
constexpr std::string_view kFiller[] = {"shares", "stock", "today", "quarter", "session",
                                        "update", "traders", "watch", "after", "as"};

std::string ticker_name(std::size_t i) {
    std::string name = "SYN";
    name += static_cast<char>('A' + (i / 26) % 26);
    name += static_cast<char>('A' + i % 26);
    return name;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[rng.index(items.size())];
}

std::string make_headline(Rng& rng, const std::string& ticker, SentimentClass cls,
                          const std::vector<std::string>& positive, const std::vector<std::string>& negative,
                          const std::vector<std::string>& neutral) {
    std::string title = ticker;
    title += ' ';
    title += kFiller[rng.index(std::size(kFiller))];
    switch (cls) {
        case SentimentClass::positive: title += " " + pick(rng, positive); break;
        case SentimentClass::negative: title += " " + pick(rng, negative); break;
        case SentimentClass::neutral:
            if (!neutral.empty()) title += " " + pick(rng, neutral);
            break;
    }
    title += ' ';
    title += kFiller[rng.index(std::size(kFiller))];
    return title;
}

}  // namespace

std::vector<std::string> SynthConfig::problems() const {
    std::vector<std::string> out;
    if (tickers == 0) out.push_back("synth.tickers must be at least 1");
    if (tickers > 676) out.push_back("synth.tickers must be at most 676");
    if (bars < 2) out.push_back("synth.bars must be at least 2");
    if (!(initial_price > 0.0)) out.push_back("synth.initial_price must be positive");
    if (!(volatility >= 0.0)) out.push_back("synth.volatility must be non-negative");
    if (!std::isfinite(drift)) out.push_back("synth.drift must be finite");
    if (!(coupling >= 0.0)) out.push_back("synth.coupling must be non-negative");
    if (!(news_probability >= 0.0 && news_probability <= 1.0)) {
        out.push_back("synth.news_probability must lie in [0, 1]");
    }
    if (max_headlines == 0) out.push_back("synth.max_headlines must be at least 1");
    return out;
}

SynthOutput synthesize(const SynthConfig& cfg, const Lexicon& lexicon) {
    if (const auto issues = cfg.problems(); !issues.empty()) throw ConfigError(issues.front());
    const auto positive = lexicon.words_of(SentimentClass::positive);
    const auto negative = lexicon.words_of(SentimentClass::negative);
    const auto neutral = lexicon.words_of(SentimentClass::neutral);
    if (positive.empty() || negative.empty()) {
        throw ArgumentError("synthetic headlines need a lexicon with positive and negative words");
    }

    Rng rng(cfg.seed);
    SynthOutput out;
    for (std::size_t k = 0; k < cfg.tickers; ++k) {
        const auto ticker = ticker_name(k);
        double close = cfg.initial_price;
        Date day = cfg.start;
        for (std::size_t t = 0; t < cfg.bars; ++t) {
            while (day.is_weekend()) day = day.plus_days(1);

            double signal = 0.0;
            if (rng.uniform() < cfg.news_probability) {
                const double mood = rng.uniform(-1.0, 1.0);
                const std::size_t count = 1 + rng.index(cfg.max_headlines);
                int net = 0;
                for (std::size_t h = 0; h < count; ++h) {
                    const double u = rng.uniform();
                    SentimentClass cls = SentimentClass::neutral;
                    if (u < std::max(mood, 0.0)) {
                        cls = SentimentClass::positive;
                        ++net;
                    } else if (u < std::max(mood, 0.0) + std::max(-mood, 0.0)) {
                        cls = SentimentClass::negative;
                        --net;
                    }
                    auto title = make_headline(rng, ticker, cls, positive, negative, neutral);
                    const auto id = out.news.size();
                    out.news.push_back({day, ticker, std::move(title), "Synthetic Wire",
                                        "https://example.com/news/" + std::to_string(id), 0});
                }
                signal = static_cast<double>(net) / static_cast<double>(count);
            }

            const double open = t == 0 ? close : out.bars.back().close;
            const double wick = 1.0 + 0.5 * cfg.volatility * rng.uniform();
            const double volume = std::round(1e6 * (0.5 + rng.uniform()));
            out.bars.push_back({day, ticker, open, std::max(open, close) * wick, std::min(open, close) / wick,
                                close, volume});
            out.planted.push_back(signal);

            const double log_return = cfg.drift + cfg.coupling * signal + cfg.volatility * rng.normal();
            close *= std::exp(log_return);
            day = day.plus_days(1);
        }
    }
    return out;
}

void write_news_csv(const std::filesystem::path& path, const std::vector<NewsRecord>& news) {
    std::ostringstream out;
    csv::write_row(out, {"date", "ticker", "title", "publisher", "url"});
    for (const auto& n : news) csv::write_row(out, {n.date.to_string(), n.ticker, n.title, n.publisher, n.url});
    csv::write_atomic(path, out.str());
}

void write_prices_csv(const std::filesystem::path& path, const std::vector<PriceBar>& bars) {
    std::ostringstream out;
    csv::write_row(out, {"date", "ticker", "open", "high", "low", "close", "volume"});
    for (const auto& b : bars) {
        csv::write_row(out, {b.date.to_string(), b.ticker, csv::format_real(b.open), csv::format_real(b.high),
                             csv::format_real(b.low), csv::format_real(b.close), csv::format_real(b.volume)});
    }
    csv::write_atomic(path, out.str());
}

}  // namespace newscast
