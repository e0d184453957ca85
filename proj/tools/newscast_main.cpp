// Command-line front end: synth, ingest, train, evaluate, forecast, plot, compare.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "newscast/config.hpp"
#include "newscast/errors.hpp"
#include "newscast/pipeline.hpp"

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> seed;
    std::optional<std::string> arch;
    std::optional<std::string> ticker;
    std::optional<std::string> epochs;
    std::optional<std::string> horizon;
    std::optional<std::string> out;
    std::optional<std::string> news;
    std::optional<std::string> prices;
    std::optional<std::string> lexicon;
    std::optional<std::string> checkpoint;
    std::optional<std::string> input;
    std::vector<std::string> sets;
};

void fail(const std::string& error_class, const std::string& message) {
    std::cerr << "error[" << error_class << "]: " << message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"News-sentiment fused stock price forecasting"};
    app.require_subcommand(1);
    Flags flags;

    app.add_option("--config", flags.config, "Key-value config file (flags override it)");
    app.add_option("--seed", flags.seed, "Run seed");
    app.add_option("--arch", flags.arch, "fused_lstm | price_lstm | dnn");
    app.add_option("--ticker", flags.ticker, "Restrict to one ticker");
    app.add_option("--epochs", flags.epochs, "Training epochs");
    app.add_option("--horizon", flags.horizon, "Walk-forward forecast horizon");
    app.add_option("--out", flags.out, "Output directory");
    app.add_option("--news", flags.news, "News CSV");
    app.add_option("--prices", flags.prices, "Price CSV");
    app.add_option("--lexicon", flags.lexicon, "Lexicon TSV");
    app.add_option("--checkpoint", flags.checkpoint, "Checkpoint path (default OUT/ARCH.ckpt)");
    app.add_option("--input", flags.input, "CSV to plot");
    app.add_option("--set", flags.sets, "Extra KEY=VALUE override (repeatable)");

    const char* commands[][2] = {
        {"synth", "Generate synthetic news and price CSVs"},
        {"ingest", "Load, score and split data; write daily sentiment and rejects"},
        {"train", "Train one architecture and save the best checkpoint"},
        {"evaluate", "Score a checkpoint on the test split"},
        {"forecast", "Walk-forward one-step-ahead forecast over the test period"},
        {"plot", "Render a history or prediction CSV as SVG"},
        {"compare", "Train and evaluate all three architectures"},
    };
    for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        fail("usage-error", e.what());
        return 2;
    }

    newscast::RunConfig config;
    std::vector<std::string> problems;
    if (flags.config) problems = newscast::apply_config_file(config, *flags.config);

    auto apply = [&](const char* key, const std::optional<std::string>& value) {
        if (!value) return;
        if (auto problem = config.set(key, *value)) problems.push_back("--" + std::string(key) + ": " + *problem);
    };
    apply("seed", flags.seed);
    apply("arch", flags.arch);
    apply("ticker", flags.ticker);
    apply("epochs", flags.epochs);
    apply("horizon", flags.horizon);
    apply("out", flags.out);
    apply("news", flags.news);
    apply("prices", flags.prices);
    apply("lexicon", flags.lexicon);
    apply("checkpoint", flags.checkpoint);
    apply("input", flags.input);
    for (const auto& kv : flags.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            problems.push_back("--set expects KEY=VALUE, got '" + kv + "'");
        } else if (auto problem = config.set(kv.substr(0, eq), kv.substr(eq + 1))) {
            problems.push_back("--set: " + *problem);
        }
    }
    for (auto& p : config.problems()) problems.push_back(std::move(p));
    if (!problems.empty()) {
        std::string joined;
        for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
        fail("config-error", joined);
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "synth") newscast::run_synth(config, std::cout);
        else if (command == "ingest") newscast::run_ingest(config, std::cout);
        else if (command == "train") newscast::run_train(config, std::cout);
        else if (command == "evaluate") newscast::run_evaluate(config, std::cout);
        else if (command == "forecast") newscast::run_forecast(config, std::cout);
        else if (command == "plot") newscast::run_plot(config, std::cout);
        else if (command == "compare") newscast::run_compare(config, std::cout);
    } catch (const newscast::Error& e) {
        fail(e.error_class(), e.what());
        return newscast::exit_code_for(e.category());
    } catch (const std::filesystem::filesystem_error& e) {
        fail("io-error", e.what());
        return 3;
    } catch (const std::exception& e) {
        fail("internal-error", e.what());
        return 1;
    }
    return 0;
}
