#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newscast/dataset.hpp"
#include "newscast/models.hpp"
#include "newscast/synth.hpp"
#include "newscast/training.hpp"

namespace newscast {

/// Everything one CLI invocation needs. Defaults follow the reference
/// protocol: window 8, 100 epochs, 0.85 / 0.15 splits.
struct RunConfig {
    // Unset paths resolve to out/news.csv, out/prices.csv and the built-in
    // lexicon, so `synth` followed by any other command needs no flags.
    std::optional<std::filesystem::path> news;
    std::optional<std::filesystem::path> prices;
    std::optional<std::filesystem::path> lexicon;
    std::filesystem::path out = "out";
    std::optional<std::filesystem::path> checkpoint;
    std::optional<std::filesystem::path> input;
    Architecture arch = Architecture::fused_lstm;
    std::size_t window = kDefaultWindow;
    std::size_t max_len = kDefaultMaxTokens;
    std::size_t horizon = 100;
    std::optional<std::string> ticker;
    std::optional<Date> news_earliest;
    std::optional<Date> news_latest;
    SplitSpec split;
    TrainConfig train;
    SynthConfig synth;

    /// Key-value assignment as used by config files. Returns a problem
    /// description instead of throwing.
    std::optional<std::string> set(std::string_view key, std::string_view value);

    /// Every semantic problem with the current values.
    std::vector<std::string> problems() const;

    std::filesystem::path checkpoint_path() const;
    std::filesystem::path news_path() const;
    std::filesystem::path prices_path() const;
    Lexicon load_lexicon() const;
};

/// Parses `key = value` lines ('#' comments, blank lines allowed) into
/// `config`. Collects every problem rather than stopping at the first.
std::vector<std::string> apply_config_text(RunConfig& config, std::string_view text);
std::vector<std::string> apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Supported configuration keys, for help output.
std::vector<std::string> config_keys();

}  // namespace newscast
