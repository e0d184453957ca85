#include "newscast/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"
#include "newscast/numerics.hpp"

namespace newscast {

TokenSequence tokenize_and_pad(std::string_view headline, std::size_t max_len) {
    if (max_len == 0) throw ArgumentError("tokenize_and_pad: max_len must be at least 1");
    TokenSequence seq;
    seq.tokens.reserve(max_len);
    std::string word;
    auto flush = [&] {
        if (!word.empty() && seq.tokens.size() < max_len) seq.tokens.push_back(word);
        word.clear();
    };
    for (char raw : headline) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            continue;
        } else {
            word.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        }
    }
    flush();
    seq.pad_count = max_len - seq.tokens.size();
    seq.tokens.resize(max_len, std::string(kPadToken));
    return seq;
}

std::optional<SentimentClass> parse_sentiment_class(std::string_view name) {
    if (name == "neutral") return SentimentClass::neutral;
    if (name == "positive") return SentimentClass::positive;
    if (name == "negative") return SentimentClass::negative;
    return std::nullopt;
}

std::string_view sentiment_class_name(SentimentClass cls) noexcept {
    switch (cls) {
        case SentimentClass::neutral: return "neutral";
        case SentimentClass::positive: return "positive";
        case SentimentClass::negative: return "negative";
    }
    return "neutral";
}

SentimentDistribution SentimentDistribution::from_probabilities(std::span<const double> p) {
    if (p.size() != 3) throw ArgumentError("a sentiment distribution needs exactly 3 values");
    return {p[0], p[1], p[2]};
}

bool SentimentDistribution::is_valid(double tolerance) const noexcept {
    for (double v : as_array()) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return std::abs(neutral + positive + negative - 1.0) <= tolerance;
}

Lexicon Lexicon::parse(std::string_view text) {
    Lexicon lex;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? end : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
        if (tab2 == std::string_view::npos || line.find('\t', tab2 + 1) != std::string_view::npos) {
            throw FormatError("lexicon entry must be word<TAB>class<TAB>weight", line_no);
        }
        const auto word = line.substr(0, tab1);
        const auto cls_name = line.substr(tab1 + 1, tab2 - tab1 - 1);
        const auto weight_text = line.substr(tab2 + 1);

        const auto tokens = tokenize_and_pad(word, 2);
        if (tokens.content_length() != 1) {
            throw FormatError("lexicon word must be a single token", line_no);
        }
        const auto cls = parse_sentiment_class(cls_name);
        if (!cls) throw FormatError("unknown sentiment class '" + std::string(cls_name) + "'", line_no);
        double weight = 0.0;
        if (!csv::parse_real(weight_text, weight)) {
            throw FormatError("bad weight '" + std::string(weight_text) + "'", line_no);
        }
        lex.add(tokens.tokens[0], *cls, weight);
    }
    return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lexicon '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void Lexicon::add(std::string word, SentimentClass cls, double weight) {
    entries_[std::move(word)] = LexiconEntry{cls, weight};
}

const LexiconEntry* Lexicon::find(std::string_view word) const {
    const auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> Lexicon::words_of(SentimentClass cls) const {
    std::vector<std::string> out;
    for (const auto& [word, entry] : entries_) {
        if (entry.cls == cls) out.push_back(word);
    }
    return out;
}

Logits lexicon_score(const TokenSequence& tokens, const Lexicon& lexicon) {
    Logits logits{0.0, 0.0, 0.0};
    for (const auto& token : tokens.tokens) {
        if (token == kPadToken) continue;
        if (const auto* entry = lexicon.find(token)) {
            logits[static_cast<std::size_t>(entry->cls)] += entry->weight;
        }
    }
    return logits;
}

SentimentDistribution score_headline(const TokenSequence& tokens, const SentimentScorer& scorer,
                                     std::string_view headline_id) {
    Logits logits;
    try {
        logits = scorer.logits(tokens);
    } catch (const std::exception& e) {
        throw ScorerError(std::string(headline_id), e.what());
    }
    for (double v : logits) {
        if (!std::isfinite(v)) throw ScorerError(std::string(headline_id), "non-finite logit");
    }
    return SentimentDistribution::from_probabilities(softmax(logits));
}

std::vector<DailySentiment> aggregate_daily(std::vector<ScoredHeadline> scored) {
    std::map<std::pair<std::string, Date>, std::vector<std::array<double, 3>>> groups;
    for (auto& s : scored) {
        groups[{std::move(s.ticker), s.date}].push_back(s.distribution.as_array());
    }
    std::vector<DailySentiment> out;
    out.reserve(groups.size());
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end());
        std::array<double, 3> sum{0.0, 0.0, 0.0};
        for (const auto& m : members) {
            for (std::size_t c = 0; c < 3; ++c) sum[c] += m[c];
        }
        const auto n = static_cast<double>(members.size());
        out.push_back({key.second, key.first, {sum[0] / n, sum[1] / n, sum[2] / n}, members.size()});
    }
    return out;
}

SentimentLookup::SentimentLookup(const std::vector<DailySentiment>& daily) {
    for (const auto& d : daily) table_[{d.ticker, d.date}] = d.distribution;
}

std::optional<SentimentDistribution> SentimentLookup::find(std::string_view ticker, Date date) const {
    const auto it = table_.find({std::string(ticker), date});
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

SentimentDistribution SentimentLookup::at_or_uniform(std::string_view ticker, Date date) const {
    return find(ticker, date).value_or(SentimentDistribution::uniform());
}

}  // namespace newscast
