#include "newscast/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"

namespace newscast {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool to_size(std::string_view s, std::size_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

bool to_u64(std::string_view s, std::uint64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

bool to_bool(std::string_view s, bool& out) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
    return false;
}

using Setter = std::function<bool(RunConfig&, std::string_view)>;

Setter size_field(std::size_t RunConfig::*field) {
    return [field](RunConfig& c, std::string_view v) { return to_size(v, c.*field); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"news", [](RunConfig& c, std::string_view v) { return c.news = std::string(v), !v.empty(); }},
        {"prices", [](RunConfig& c, std::string_view v) { return c.prices = std::string(v), !v.empty(); }},
        {"lexicon", [](RunConfig& c, std::string_view v) { return c.lexicon = std::string(v), !v.empty(); }},
        {"out", [](RunConfig& c, std::string_view v) { return c.out = std::string(v), !v.empty(); }},
        {"checkpoint",
         [](RunConfig& c, std::string_view v) { return c.checkpoint = std::string(v), !v.empty(); }},
        {"input", [](RunConfig& c, std::string_view v) { return c.input = std::string(v), !v.empty(); }},
        {"arch",
         [](RunConfig& c, std::string_view v) {
             try {
                 c.arch = parse_architecture(v);
                 return true;
             } catch (const ArgumentError&) {
                 return false;
             }
         }},
        {"window", size_field(&RunConfig::window)},
        {"max_len", size_field(&RunConfig::max_len)},
        {"horizon", size_field(&RunConfig::horizon)},
        {"ticker", [](RunConfig& c, std::string_view v) { return c.ticker = std::string(v), !v.empty(); }},
        {"news_earliest", [](RunConfig& c, std::string_view v) { return bool(c.news_earliest = Date::parse(v)); }},
        {"news_latest", [](RunConfig& c, std::string_view v) { return bool(c.news_latest = Date::parse(v)); }},
        {"train_fraction",
         [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.split.train_fraction); }},
        {"val_fraction",
         [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.split.val_fraction_of_train); }},
        {"epochs", [](RunConfig& c, std::string_view v) { return to_size(v, c.train.epochs); }},
        {"batch_size", [](RunConfig& c, std::string_view v) { return to_size(v, c.train.batch_size); }},
        {"seed",
         [](RunConfig& c, std::string_view v) {
             if (!to_u64(v, c.train.seed)) return false;
             c.synth.seed = c.train.seed;
             return true;
         }},
        {"clip_norm",
         [](RunConfig& c, std::string_view v) {
             if (v == "none" || v == "off") return c.train.clip_norm.reset(), true;
             double x = 0.0;
             if (!csv::parse_real(v, x)) return false;
             c.train.clip_norm = x;
             return true;
         }},
        {"shuffle", [](RunConfig& c, std::string_view v) { return to_bool(v, c.train.shuffle_each_epoch); }},
        {"learning_rate",
         [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.train.adam.learning_rate); }},
        {"beta1", [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.train.adam.beta1); }},
        {"beta2", [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.train.adam.beta2); }},
        {"adam_epsilon", [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.train.adam.epsilon); }},
        {"synth.tickers", [](RunConfig& c, std::string_view v) { return to_size(v, c.synth.tickers); }},
        {"synth.bars", [](RunConfig& c, std::string_view v) { return to_size(v, c.synth.bars); }},
        {"synth.start",
         [](RunConfig& c, std::string_view v) {
             const auto d = Date::parse(v);
             if (d) c.synth.start = *d;
             return d.has_value();
         }},
        {"synth.initial_price",
         [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.synth.initial_price); }},
        {"synth.drift", [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.synth.drift); }},
        {"synth.volatility", [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.synth.volatility); }},
        {"synth.coupling", [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.synth.coupling); }},
        {"synth.news_probability",
         [](RunConfig& c, std::string_view v) { return csv::parse_real(v, c.synth.news_probability); }},
        {"synth.max_headlines", [](RunConfig& c, std::string_view v) { return to_size(v, c.synth.max_headlines); }},
    };
    return table;
}

}  // namespace

std::optional<std::string> RunConfig::set(std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    const auto it = setters().find(key);
    if (it == setters().end()) return "unknown key '" + std::string(key) + "'";
    if (!it->second(*this, value)) return "invalid value '" + std::string(value) + "' for '" + std::string(key) + "'";
    return std::nullopt;
}

std::vector<std::string> RunConfig::problems() const {
    std::vector<std::string> out;
    if (window < 1) out.push_back("window must be at least 1");
    if (max_len < 1) out.push_back("max_len must be at least 1");
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) out.push_back("train_fraction must lie in (0, 1)");
    if (!(split.val_fraction_of_train > 0.0 && split.val_fraction_of_train < 1.0)) {
        out.push_back("val_fraction must lie in (0, 1)");
    }
    if (train.epochs < 1) out.push_back("epochs must be at least 1");
    if (train.batch_size < 1) out.push_back("batch_size must be at least 1");
    if (train.clip_norm && !(*train.clip_norm > 0.0)) out.push_back("clip_norm must be positive");
    if (!(train.adam.learning_rate >= 0.0)) out.push_back("learning_rate must be non-negative");
    if (!(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0)) out.push_back("beta1 must lie in [0, 1)");
    if (!(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0)) out.push_back("beta2 must lie in [0, 1)");
    if (!(train.adam.epsilon > 0.0)) out.push_back("adam_epsilon must be positive");
    if (news_earliest && news_latest && *news_latest < *news_earliest) {
        out.push_back("news_latest precedes news_earliest");
    }
    for (auto& p : synth.problems()) out.push_back(std::move(p));
    return out;
}

std::filesystem::path RunConfig::news_path() const { return news ? *news : out / "news.csv"; }

std::filesystem::path RunConfig::prices_path() const { return prices ? *prices : out / "prices.csv"; }

Lexicon RunConfig::load_lexicon() const {
    return lexicon ? Lexicon::load(*lexicon) : Lexicon::parse(default_lexicon_text());
}

std::filesystem::path RunConfig::checkpoint_path() const {
    if (checkpoint) return *checkpoint;
    return out / (std::string(architecture_name(arch)) + ".ckpt");
}

std::vector<std::string> apply_config_text(RunConfig& config, std::string_view text) {
    std::vector<std::string> problems;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        auto line = trim(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        pos = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        if (auto problem = config.set(line.substr(0, eq), line.substr(eq + 1))) {
            problems.push_back("line " + std::to_string(line_no) + ": " + *problem);
        }
    }
    return problems;
}

std::vector<std::string> apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {"cannot open config file '" + path.string() + "'"};
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto problems = apply_config_text(config, buffer.str());
    for (auto& p : problems) p = path.string() + ": " + p;
    return problems;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, v] : setters()) keys.push_back(k);
    return keys;
}

}  // namespace newscast
