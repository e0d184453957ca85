#include "newscast/pipeline.hpp"

#include <sstream>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"
#include "newscast/plot.hpp"
#include "newscast/synth.hpp"

namespace newscast {

namespace {

std::filesystem::path artifact(const RunConfig& config, Architecture arch, const std::string& suffix) {
    return config.out / (std::string(architecture_name(arch)) + suffix);
}

void write_daily_sentiment(const std::filesystem::path& path, const std::vector<DailySentiment>& daily) {
    std::ostringstream out;
    csv::write_row(out, {"date", "ticker", "neutral", "positive", "negative", "headline_count"});
    for (const auto& d : daily) {
        csv::write_row(out, {d.date.to_string(), d.ticker, csv::format_real(d.distribution.neutral),
                             csv::format_real(d.distribution.positive), csv::format_real(d.distribution.negative),
                             std::to_string(d.headline_count)});
    }
    csv::write_atomic(path, out.str());
}

void log_warnings(std::ostream& log, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) log << "warning: " << w << '\n';
}

TrainResult train_and_save(const RunConfig& config, Architecture arch, const PreparedData& data, std::ostream& log) {
    Rng init_rng(config.train.seed);
    ModelShape shape;
    shape.window = config.window;
    auto model = make_model(arch, init_rng, shape);
    log << "training " << architecture_name(arch) << " (" << count_params(model) << " parameters) on "
        << data.windows.train.size() << " train / " << data.windows.validation.size() << " validation windows\n";
    auto result = train(std::move(model), data.windows.train, data.windows.validation, config.train,
                        data.windows.scalers);
    save_checkpoint(artifact(config, arch, ".ckpt"), result.best);
    write_history(artifact(config, arch, "_history.csv"), result.history);
    log << "best epoch " << result.best.epoch << ", validation loss " << csv::format_real(result.best.validation_loss)
        << " (normalized MSE)\n";
    return result;
}

Evaluation evaluate_and_save(const RunConfig& config, const Checkpoint& ckpt, const PreparedData& data,
                             std::ostream& log) {
    auto ev = evaluate(ckpt, data.windows.test);
    const auto arch = ckpt.params.arch;
    write_report_csv(artifact(config, arch, "_report.csv"), {ev.report});
    csv::write_atomic(artifact(config, arch, "_report.txt"), format_report_table({ev.report}));
    write_predictions(artifact(config, arch, "_predictions.csv"), ev.predictions);
    log << format_report_table({ev.report});
    return ev;
}

}  // namespace

ScoredNews score_news(const std::vector<NewsRecord>& news, const SentimentScorer& scorer, std::size_t max_len,
                      const std::map<std::string, std::vector<PriceBar>>& bars_by_ticker) {
    std::vector<ScoredHeadline> scored;
    scored.reserve(news.size());
    for (const auto& n : news) {
        const auto tokens = tokenize_and_pad(n.title, max_len);
        const auto id = n.line ? "line " + std::to_string(n.line) : n.url;
        scored.push_back({n.date, n.ticker, score_headline(tokens, scorer, id)});
    }
    ScoredNews out;
    out.headlines = scored.size();
    auto aligned = align_to_trading_days(std::move(scored), bars_by_ticker);
    out.dropped = aligned.dropped;
    out.daily = aggregate_daily(std::move(aligned.aligned));
    return out;
}

void require_valid(const RunConfig& config) {
    const auto problems = config.problems();
    if (problems.empty()) return;
    std::string message;
    for (const auto& p : problems) message += (message.empty() ? "" : "; ") + p;
    throw ConfigError(message);
}

PreparedData prepare_data(const RunConfig& config, Architecture arch, std::size_t window,
                          const std::map<std::string, MinMaxScaler>* scalers) {
    PreparedData data;
    auto prices = load_prices(config.prices_path());
    data.price_rejects = std::move(prices.rejects);
    if (config.ticker) {
        std::erase_if(prices.records, [&](const PriceBar& b) { return b.ticker != *config.ticker; });
    }
    data.bars = group_by_ticker(prices.records);
    if (data.bars.empty()) throw FormatError("no usable price rows in '" + config.prices_path().string() + "'");

    if (arch == Architecture::fused_lstm) {
        auto news = load_news(config.news_path(), {config.news_earliest, config.news_latest});
        data.news_rejects = std::move(news.rejects);
        const LexiconScorer scorer(config.load_lexicon());
        data.news = score_news(news.records, scorer, config.max_len, data.bars);
        data.sentiment = SentimentLookup(data.news.daily);
    }

    WindowOptions options;
    options.split = config.split;
    options.window = window;
    options.fused = arch == Architecture::fused_lstm;
    options.scalers = scalers;
    data.windows = prepare_windows(data.bars, &data.sentiment, options);
    return data;
}

SynthFiles run_synth(const RunConfig& config, std::ostream& log) {
    require_valid(config);
    const auto lexicon = config.load_lexicon();
    const auto synth = synthesize(config.synth, lexicon);
    std::filesystem::create_directories(config.out);
    SynthFiles files{config.news_path(), config.prices_path()};
    write_news_csv(files.news, synth.news);
    write_prices_csv(files.prices, synth.bars);
    log << "wrote " << synth.news.size() << " headlines to " << files.news.string() << " and " << synth.bars.size()
        << " bars to " << files.prices.string() << '\n';
    return files;
}

IngestSummary run_ingest(const RunConfig& config, std::ostream& log) {
    require_valid(config);
    std::filesystem::create_directories(config.out);
    const auto data = prepare_data(config, Architecture::fused_lstm, config.window);
    write_rejects(config.out / "news_rejects.csv", data.news_rejects);
    write_rejects(config.out / "price_rejects.csv", data.price_rejects);
    write_daily_sentiment(config.out / "daily_sentiment.csv", data.news.daily);

    std::ostringstream split;
    csv::write_row(split, {"ticker", "train", "validation", "test"});
    for (const auto& [ticker, c] : data.windows.bar_counts) {
        csv::write_row(split, {ticker, std::to_string(c.train), std::to_string(c.validation), std::to_string(c.test)});
    }
    const auto& t = data.windows.bar_totals;
    csv::write_row(split, {"TOTAL", std::to_string(t.train), std::to_string(t.validation), std::to_string(t.test)});
    csv::write_atomic(config.out / "split_summary.csv", split.str());

    IngestSummary summary;
    for (const auto& [ticker, bars] : data.bars) summary.price_records += bars.size();
    summary.news_records = data.news.headlines;
    summary.daily_rows = data.news.daily.size();
    summary.bar_totals = t;
    log_warnings(log, data.windows.warnings);
    log << "news: " << summary.news_records << " headlines (" << data.news_rejects.size() << " rejected, "
        << data.news.dropped << " without a trading day), " << summary.daily_rows << " daily rows\n";
    log << "prices: " << summary.price_records << " bars (" << data.price_rejects.size() << " rejected); split "
        << t.train << " / " << t.validation << " / " << t.test << '\n';
    return summary;
}

TrainResult run_train(const RunConfig& config, std::ostream& log) {
    require_valid(config);
    std::filesystem::create_directories(config.out);
    const auto data = prepare_data(config, config.arch, config.window);
    log_warnings(log, data.windows.warnings);
    return train_and_save(config, config.arch, data, log);
}

Checkpoint load_matching_checkpoint(const RunConfig& config) {
    auto ckpt = load_checkpoint(config.checkpoint_path());
    if (ckpt.params.arch != config.arch) {
        throw ArchitectureMismatchError("checkpoint '" + config.checkpoint_path().string() + "' holds " +
                                        std::string(architecture_name(ckpt.params.arch)) + ", config asks for " +
                                        std::string(architecture_name(config.arch)));
    }
    return ckpt;
}

Evaluation run_evaluate(const RunConfig& config, std::ostream& log) {
    require_valid(config);
    const auto ckpt = load_matching_checkpoint(config);
    std::filesystem::create_directories(config.out);
    const auto data = prepare_data(config, config.arch, ckpt.params.window, &ckpt.scalers);
    return evaluate_and_save(config, ckpt, data, log);
}

ForecastResult run_forecast(const RunConfig& config, std::ostream& log) {
    require_valid(config);
    const auto ckpt = load_matching_checkpoint(config);
    std::filesystem::create_directories(config.out);
    const auto data = prepare_data(config, config.arch, ckpt.params.window, &ckpt.scalers);
    if (data.windows.bar_counts.empty()) throw FormatError("no ticker has enough bars to forecast");
    const std::string ticker = config.ticker.value_or(data.windows.bar_counts.begin()->first);
    const auto counts = data.windows.bar_counts.find(ticker);
    if (counts == data.windows.bar_counts.end()) throw FormatError("no usable bars for ticker '" + ticker + "'");
    const auto& bars = data.bars.at(ticker);
    const std::size_t first = counts->second.train + counts->second.validation;

    auto result = rolling_forecast(ckpt, bars, first, &data.sentiment, config.horizon);
    log_warnings(log, result.warnings);
    const auto path = artifact(config, config.arch, "_forecast.csv");
    write_forecast(path, result.rows);
    log << "wrote " << result.rows.size() << " walk-forward predictions for " << ticker << " to " << path.string()
        << '\n';
    return result;
}

std::filesystem::path run_plot(const RunConfig& config, std::ostream& log) {
    if (!config.input) throw ConfigError("plot needs an input CSV (--input)");
    const auto path = plot_csv(*config.input, config.out);
    log << "wrote " << path.string() << '\n';
    return path;
}

std::vector<EvalReport> run_compare(const RunConfig& config, std::ostream& log) {
    require_valid(config);
    std::filesystem::create_directories(config.out);
    std::vector<EvalReport> reports;
    for (const auto arch : {Architecture::fused_lstm, Architecture::price_lstm, Architecture::dnn}) {
        const auto data = prepare_data(config, arch, config.window);
        log_warnings(log, data.windows.warnings);
        const auto trained = train_and_save(config, arch, data, log);
        reports.push_back(evaluate_and_save(config, trained.best, data, log).report);
    }
    write_report_csv(config.out / "comparison.csv", reports);
    const auto table = format_report_table(reports);
    csv::write_atomic(config.out / "comparison.txt", table);
    log << table;
    return reports;
}

}  // namespace newscast
