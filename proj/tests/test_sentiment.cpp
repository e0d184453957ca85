#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "newscast/errors.hpp"
#include "newscast/numerics.hpp"
#include "newscast/sentiment.hpp"

using namespace newscast;

namespace {

const std::string kPad{kPadToken};

Lexicon sample_lexicon() {
    return Lexicon::parse(
        "# word\tclass\tweight\n"
        "profit\tpositive\t1.0\n"
        "growth\tpositive\t1.0\n"
        "layoffs\tnegative\t1.5\n"
        "\n"
        "steady\tneutral\t0.5\n");
}

class ThrowingScorer final : public SentimentScorer {
public:
    Logits logits(const TokenSequence&) const override { throw std::runtime_error("model offline"); }
};

class NanScorer final : public SentimentScorer {
public:
    Logits logits(const TokenSequence&) const override { return {0.0, std::nan(""), 0.0}; }
};

class RandomLogits final : public SentimentScorer {
public:
    explicit RandomLogits(Logits l) : l_(l) {}
    Logits logits(const TokenSequence&) const override { return l_; }

private:
    Logits l_;
};

}  // namespace

TEST(Tokenize, PadsShortHeadline) {
    const auto t = tokenize_and_pad("Profits soar", 4);
    EXPECT_EQ(t.tokens, (std::vector<std::string>{"profits", "soar", kPad, kPad}));
    EXPECT_EQ(t.pad_count, 2u);
}

TEST(Tokenize, TruncatesLongHeadline) {
    const auto t = tokenize_and_pad("a b c d e", 4);
    EXPECT_EQ(t.tokens, (std::vector<std::string>{"a", "b", "c", "d"}));
    EXPECT_EQ(t.pad_count, 0u);
}

TEST(Tokenize, EmptyAndBlankAreAllPad) {
    for (const char* h : {"", "   \t ", "!!! ..."}) {
        const auto t = tokenize_and_pad(h, 3);
        EXPECT_EQ(t.tokens, (std::vector<std::string>(3, kPad)));
        EXPECT_EQ(t.pad_count, 3u);
    }
}

TEST(Tokenize, StripsPunctuationAndLowercases) {
    const auto t = tokenize_and_pad("ACME's Q3 profit: up 12%!", 6);
    EXPECT_EQ(t.tokens, (std::vector<std::string>{"acmes", "q3", "profit", "up", "12", kPad}));
}

TEST(Tokenize, PadLiteralInTextIsNotPad) {
    const auto t = tokenize_and_pad("<pad> news", 3);
    EXPECT_EQ(t.tokens[0], "pad");
    EXPECT_EQ(t.pad_count, 1u);
}

TEST(Tokenize, ZeroMaxLenRejected) { EXPECT_THROW(tokenize_and_pad("x", 0), ArgumentError); }

TEST(Tokenize, IdempotentOnRejoinedTokens) {
    Rng rng(7);
    const std::string alphabet = "abcXYZ019 ,.;!?'-\t";
    for (int trial = 0; trial < 500; ++trial) {
        std::string h;
        const auto len = rng.index(60);
        for (std::size_t i = 0; i < len; ++i) h += alphabet[rng.index(alphabet.size())];
        const auto max_len = 1 + rng.index(12);
        const auto first = tokenize_and_pad(h, max_len);
        std::string joined;
        for (std::size_t i = 0; i < first.content_length(); ++i) joined += (i ? " " : "") + first.tokens[i];
        const auto second = tokenize_and_pad(joined, max_len);
        ASSERT_EQ(first.tokens, second.tokens) << h;
        ASSERT_EQ(first.pad_count, second.pad_count);
        ASSERT_EQ(first.pad_count,
                  static_cast<std::size_t>(std::count(first.tokens.begin(), first.tokens.end(), kPad)));
    }
}

TEST(LexiconScore, Additive) {
    const auto lex = sample_lexicon();
    EXPECT_EQ(lexicon_score(tokenize_and_pad("profit growth", 4), lex), (Logits{0.0, 2.0, 0.0}));
    EXPECT_EQ(lexicon_score(tokenize_and_pad("nothing here", 4), lex), (Logits{0.0, 0.0, 0.0}));
    EXPECT_EQ(lexicon_score(tokenize_and_pad("profit layoffs", 4), lex), (Logits{0.0, 1.0, 1.5}));
    EXPECT_EQ(lexicon_score(tokenize_and_pad("steady profit", 4), lex), (Logits{0.5, 1.0, 0.0}));
}

TEST(Lexicon, MalformedLinesReportLineNumber) {
    const char* cases[] = {
        "profit\tpositive\t1.0\nbroken line\n",
        "profit\tpositive\t1.0\nloss\tbearish\t1.0\n",
        "profit\tpositive\t1.0\nloss\tnegative\tabc\n",
        "profit\tpositive\t1.0\ntwo words\tnegative\t1.0\n",
    };
    for (const char* text : cases) {
        try {
            Lexicon::parse(text);
            FAIL() << "expected FormatError for " << text;
        } catch (const FormatError& e) {
            EXPECT_EQ(e.line(), 2u) << text;
        }
    }
}

TEST(ScoreHeadline, AllPadIsUniform) {
    const LexiconScorer scorer(sample_lexicon());
    const auto d = score_headline(tokenize_and_pad("", 8), scorer);
    EXPECT_DOUBLE_EQ(d.neutral, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(d.positive, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(d.negative, 1.0 / 3.0);
}

TEST(ScoreHeadline, SinglePositiveWordMatchesHighPrecisionSoftmax) {
    const LexiconScorer scorer(sample_lexicon());
    const auto d = score_headline(tokenize_and_pad("Quarterly profit reported", 8), scorer);
    // 50-digit evaluation of softmax([0, 1, 0]).
    EXPECT_NEAR(d.neutral, 0.21194155761708544507, 1e-15);
    EXPECT_NEAR(d.positive, 0.57611688476582910986, 1e-15);
    EXPECT_NEAR(d.negative, 0.21194155761708544507, 1e-15);
}

TEST(ScoreHeadline, ScorerFailuresCarryHeadlineId) {
    const auto tokens = tokenize_and_pad("x", 2);
    try {
        score_headline(tokens, ThrowingScorer{}, "row-17");
        FAIL();
    } catch (const ScorerError& e) {
        EXPECT_EQ(e.headline_id(), "row-17");
    }
    EXPECT_THROW(score_headline(tokens, NanScorer{}, "row-18"), ScorerError);
}

TEST(ScoreHeadline, AlwaysOnSimplex) {
    Rng rng(3);
    const auto tokens = tokenize_and_pad("x", 2);
    for (int i = 0; i < 2000; ++i) {
        const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
        const Logits l{rng.normal() * scale, rng.normal() * scale, rng.normal() * scale};
        const auto d = score_headline(tokens, RandomLogits(l));
        ASSERT_TRUE(d.is_valid(1e-9));
    }
}

TEST(Aggregate, Examples) {
    const Date d = Date::from_ymd(2020, 3, 2);
    EXPECT_TRUE(aggregate_daily({}).empty());

    const auto one = aggregate_daily({{d, "T", {0.2, 0.5, 0.3}}});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].distribution, (SentimentDistribution{0.2, 0.5, 0.3}));
    EXPECT_EQ(one[0].headline_count, 1u);

    const auto two = aggregate_daily({{d, "T", {1, 0, 0}}, {d, "T", {0, 1, 0}}});
    ASSERT_EQ(two.size(), 1u);
    EXPECT_EQ(two[0].distribution, (SentimentDistribution{0.5, 0.5, 0.0}));
    EXPECT_EQ(two[0].headline_count, 2u);
}

TEST(Aggregate, SortedByTickerThenDate) {
    const Date a = Date::from_ymd(2020, 1, 2), b = Date::from_ymd(2020, 1, 3);
    const auto out = aggregate_daily({{b, "ZZ", {}}, {a, "ZZ", {}}, {b, "AA", {}}, {a, "AA", {}}});
    ASSERT_EQ(out.size(), 4u);
    EXPECT_EQ(out[0].ticker, "AA");
    EXPECT_EQ(out[0].date, a);
    EXPECT_EQ(out[1].date, b);
    EXPECT_EQ(out[2].ticker, "ZZ");
    EXPECT_EQ(out[3].date, b);
}

TEST(Aggregate, MatchesBruteForceMeanAndIsPermutationInvariant) {
    Rng rng(11);
    const char* tickers[] = {"AAA", "BBB", "CCC"};
    for (std::size_t n : {1u, 7u, 100u, 1000u}) {
        std::vector<ScoredHeadline> input;
        for (std::size_t i = 0; i < n; ++i) {
            const double raw[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
            const double z = raw[0] + raw[1] + raw[2];
            const double p[3] = {raw[0] / z, raw[1] / z, raw[2] / z};
            input.push_back({Date::from_ymd(2021, 5, 1).plus_days(static_cast<int>(rng.index(20))),
                             tickers[rng.index(3)], SentimentDistribution::from_probabilities(p)});
        }

        // Oracle: re-sum each group independently by scanning the whole list.
        std::map<std::pair<std::string, Date>, std::size_t> keys;
        for (const auto& h : input) ++keys[{h.ticker, h.date}];

        const auto out = aggregate_daily(input);
        ASSERT_EQ(out.size(), keys.size());
        std::size_t total = 0, k = 0;
        for (const auto& [key, count] : keys) {
            double s[3] = {0, 0, 0};
            for (const auto& h : input) {
                if (h.ticker == key.first && h.date == key.second) {
                    s[0] += h.distribution.neutral;
                    s[1] += h.distribution.positive;
                    s[2] += h.distribution.negative;
                }
            }
            const auto& got = out[k++];
            ASSERT_EQ(got.ticker, key.first);
            ASSERT_EQ(got.date, key.second);
            ASSERT_EQ(got.headline_count, count);
            EXPECT_NEAR(got.distribution.neutral, s[0] / count, 1e-12);
            EXPECT_NEAR(got.distribution.positive, s[1] / count, 1e-12);
            EXPECT_NEAR(got.distribution.negative, s[2] / count, 1e-12);
            EXPECT_TRUE(got.distribution.is_valid());
            total += got.headline_count;
        }
        EXPECT_EQ(total, n);

        auto shuffled = input;
        rng.shuffle(shuffled);
        const auto again = aggregate_daily(shuffled);
        ASSERT_EQ(again.size(), out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_EQ(again[i].distribution, out[i].distribution);
            EXPECT_EQ(again[i].headline_count, out[i].headline_count);
        }
    }
}

TEST(Lookup, MissingDayIsUniform) {
    const Date d = Date::from_ymd(2020, 3, 2);
    const SentimentLookup lookup(aggregate_daily({{d, "T", {0.2, 0.5, 0.3}}}));
    EXPECT_EQ(lookup.at_or_uniform("T", d), (SentimentDistribution{0.2, 0.5, 0.3}));
    EXPECT_EQ(lookup.at_or_uniform("T", d.plus_days(1)), SentimentDistribution::uniform());
    EXPECT_FALSE(lookup.find("U", d).has_value());
}
