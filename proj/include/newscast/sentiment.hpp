#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newscast/date.hpp"

namespace newscast {

/// Reserved padding token. The tokenizer strips '<' and '>', so no real
/// word can collide with it.
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::size_t kDefaultMaxTokens = 32;

struct TokenSequence {
    std::vector<std::string> tokens;  // always exactly max_len entries
    std::size_t pad_count = 0;

    std::size_t max_len() const noexcept { return tokens.size(); }
    std::size_t content_length() const noexcept { return tokens.size() - pad_count; }
};

/// Lowercases ASCII, deletes ASCII punctuation, splits on whitespace, then
/// truncates or right-pads with kPadToken to exactly `max_len` tokens.
TokenSequence tokenize_and_pad(std::string_view headline, std::size_t max_len = kDefaultMaxTokens);

/// Class order is (neutral, positive, negative) everywhere, including the
/// fused model's feature positions 0-2.
enum class SentimentClass : std::size_t { neutral = 0, positive = 1, negative = 2 };

std::optional<SentimentClass> parse_sentiment_class(std::string_view name);
std::string_view sentiment_class_name(SentimentClass cls) noexcept;

using Logits = std::array<double, 3>;

struct SentimentDistribution {
    double neutral = 1.0 / 3.0;
    double positive = 1.0 / 3.0;
    double negative = 1.0 / 3.0;

    static SentimentDistribution uniform() noexcept { return {}; }
    static SentimentDistribution from_probabilities(std::span<const double> p);
    std::array<double, 3> as_array() const noexcept { return {neutral, positive, negative}; }
    /// Components in [0, 1] summing to 1 within `tolerance`.
    bool is_valid(double tolerance = 1e-9) const noexcept;

    friend bool operator==(const SentimentDistribution&, const SentimentDistribution&) = default;
};

/// Anything that maps a token sequence to three class logits. Implementations
/// must be safe for concurrent const use.
class SentimentScorer {
public:
    virtual ~SentimentScorer() = default;
    virtual Logits logits(const TokenSequence& tokens) const = 0;
};

struct LexiconEntry {
    SentimentClass cls = SentimentClass::neutral;
    double weight = 0.0;
};

class Lexicon {
public:
    /// Parses `word<TAB>class<TAB>weight` lines; '#' lines and blank lines are
    /// skipped. Throws FormatError with the offending line number.
    static Lexicon parse(std::string_view text);
    static Lexicon load(const std::filesystem::path& path);

    void add(std::string word, SentimentClass cls, double weight);
    const LexiconEntry* find(std::string_view word) const;
    std::size_t size() const noexcept { return entries_.size(); }

    /// Words of one class, sorted, for headline synthesis.
    std::vector<std::string> words_of(SentimentClass cls) const;

private:
    std::map<std::string, LexiconEntry, std::less<>> entries_;
};

/// The starter lexicon shipped in data/lexicon.tsv, compiled in.
std::string_view default_lexicon_text() noexcept;

/// logit[c] = sum of weights of non-PAD tokens whose lexicon class is c.
Logits lexicon_score(const TokenSequence& tokens, const Lexicon& lexicon);

class LexiconScorer final : public SentimentScorer {
public:
    explicit LexiconScorer(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}
    Logits logits(const TokenSequence& tokens) const override {
        return lexicon_score(tokens, lexicon_);
    }
    const Lexicon& lexicon() const noexcept { return lexicon_; }

private:
    Lexicon lexicon_;
};

/// Softmax over the scorer's logits. Any scorer exception or non-finite logit
/// is rethrown as ScorerError tagged with `headline_id`.
SentimentDistribution score_headline(const TokenSequence& tokens, const SentimentScorer& scorer,
                                     std::string_view headline_id = {});

struct ScoredHeadline {
    Date date;
    std::string ticker;
    SentimentDistribution distribution;
};

struct DailySentiment {
    Date date;
    std::string ticker;
    SentimentDistribution distribution;
    std::size_t headline_count = 0;
};

/// Groups by (date, ticker) and averages probabilities component-wise.
/// Output is sorted by (ticker, date). Members of a group are summed in a
/// canonical order, so the result does not depend on input order.
std::vector<DailySentiment> aggregate_daily(std::vector<ScoredHeadline> scored);

/// (ticker, date) -> aggregated distribution.
class SentimentLookup {
public:
    SentimentLookup() = default;
    explicit SentimentLookup(const std::vector<DailySentiment>& daily);

    std::optional<SentimentDistribution> find(std::string_view ticker, Date date) const;
    /// Missing days carry no signal: the uniform distribution.
    SentimentDistribution at_or_uniform(std::string_view ticker, Date date) const;
    std::size_t size() const noexcept { return table_.size(); }

private:
    std::map<std::pair<std::string, Date>, SentimentDistribution> table_;
};

}  // namespace newscast
