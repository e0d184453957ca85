#include "newscast/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"

namespace newscast {

namespace {

constexpr char kMagic[8] = {'N', 'W', 'S', 'C', 'K', 'P', 'T', '\0'};

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = count(1);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    /// Element count that must fit in the remaining bytes at `min_bytes` each.
    std::size_t count(std::size_t min_bytes) {
        const auto n = u64();
        if (n > (bytes_.size() - pos_) / min_bytes) throw FormatError("checkpoint: implausible count");
        return static_cast<std::size_t>(n);
    }
    bool at_end() const { return pos_ == bytes_.size(); }
    void need(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw FormatError("checkpoint: truncated archive");
    }
    void expect_magic() {
        need(sizeof kMagic);
        if (std::memcmp(bytes_.data() + pos_, kMagic, sizeof kMagic) != 0) {
            throw FormatError("checkpoint: bad magic");
        }
        pos_ += sizeof kMagic;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    const auto& p = ckpt.params;
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(p.arch));
    w.u64(p.window);
    w.u64(p.feature_dim);
    w.u64(ckpt.seed);
    w.u64(ckpt.epoch);
    w.f64(ckpt.validation_loss);

    w.u64(ckpt.scalers.size());
    for (const auto& [ticker, s] : ckpt.scalers) {
        w.str(ticker);
        w.f64(s.min);
        w.f64(s.max);
    }
    w.u64(p.standardizer.mean.size());
    for (double v : p.standardizer.mean) w.f64(v);
    for (double v : p.standardizer.stddev) w.f64(v);

    w.u64(p.lstm.size());
    for (const auto& l : p.lstm) {
        w.u64(l.units);
        w.u8(l.return_sequences ? 1 : 0);
    }
    w.u64(p.dense.size());
    for (const auto& d : p.dense) {
        w.u32(static_cast<std::uint32_t>(d.activation));
        w.f64(d.alpha);
    }
    const auto tensors = p.tensors();
    w.u64(tensors.size());
    for (const Tensor* t : tensors) {
        w.u64(t->rank());
        for (auto e : t->shape()) w.u64(e);
        for (double v : t->values()) w.f64(v);
    }
    return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    r.expect_magic();
    const auto version = r.u32();
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint ckpt;
    auto& p = ckpt.params;
    const auto arch = r.u32();
    if (arch > 2) throw FormatError("checkpoint: unknown architecture tag " + std::to_string(arch));
    p.arch = static_cast<Architecture>(arch);
    p.window = r.u64();
    p.feature_dim = r.u64();
    ckpt.seed = r.u64();
    ckpt.epoch = r.u64();
    ckpt.validation_loss = r.f64();

    const auto n_scalers = r.count(24);
    for (std::size_t i = 0; i < n_scalers; ++i) {
        auto ticker = r.str();
        const double lo = r.f64();
        const double hi = r.f64();
        ckpt.scalers[std::move(ticker)] = {lo, hi};
    }
    const auto n_std = r.count(16);
    p.standardizer.mean.resize(n_std);
    p.standardizer.stddev.resize(n_std);
    for (auto& v : p.standardizer.mean) v = r.f64();
    for (auto& v : p.standardizer.stddev) v = r.f64();

    const auto n_lstm = r.count(9);
    p.lstm.resize(n_lstm);
    for (auto& l : p.lstm) {
        l.units = r.u64();
        l.return_sequences = r.u8() != 0;
    }
    const auto n_dense = r.count(12);
    p.dense.resize(n_dense);
    for (auto& d : p.dense) {
        const auto act = r.u32();
        if (act > 3) throw FormatError("checkpoint: unknown activation tag " + std::to_string(act));
        d.activation = static_cast<Activation>(act);
        d.alpha = r.f64();
    }
    const auto n_tensors = r.count(8);
    if (n_tensors != 3 * n_lstm + 2 * n_dense) {
        throw FormatError("checkpoint: tensor count does not match the layer list");
    }
    TensorList values;
    for (std::size_t i = 0; i < n_tensors; ++i) {
        const auto rank = r.count(8);
        std::vector<std::size_t> shape(rank);
        std::size_t elements = 1;
        for (auto& e : shape) {
            e = r.u64();
            if (e != 0 && elements > bytes.size() / e) throw FormatError("checkpoint: implausible shape");
            elements *= e;
        }
        r.need(elements * 8);
        std::vector<double> data(elements);
        for (auto& v : data) v = r.f64();
        values.emplace_back(std::move(shape), std::move(data));
    }
    if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");

    auto targets = p.tensors();
    for (std::size_t i = 0; i < targets.size(); ++i) *targets[i] = std::move(values[i]);
    try {
        p.validate();
    } catch (const ShapeError& e) {
        throw FormatError(std::string("checkpoint: inconsistent model: ") + e.what());
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto bytes = serialize_checkpoint(ckpt);
    csv::write_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace newscast
