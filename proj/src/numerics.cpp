#include "newscast/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "newscast/errors.hpp"

namespace newscast {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw ShapeError("tensor shape " + shape_to_string(shape_) + " does not match " +
                         std::to_string(data_.size()) + " values");
    }
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const Tensor& t, std::string_view what) {
    if (!t.all_finite()) {
        throw NumericError("non-finite value in " + std::string(what));
    }
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw ArgumentError("Rng::index requires n > 0");
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = 0;
    do {
        draw = engine_();
    } while (draw >= limit);
    return static_cast<std::size_t>(draw % bound);
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw ArgumentError("softmax of an empty vector");
    for (double v : logits) {
        if (!std::isfinite(v)) throw NumericError("softmax input is not finite");
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

Activation parse_activation(std::string_view name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "leaky_relu") return Activation::leaky_relu;
    if (name == "linear") return Activation::linear;
    throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation kind) noexcept {
    switch (kind) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::linear: return "linear";
    }
    return "unknown";
}

double activate(Activation kind, double x, double alpha) noexcept {
    switch (kind) {
        case Activation::sigmoid:
            // Split on sign so exp never overflows.
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            {
                const double e = std::exp(x);
                return e / (1.0 + e);
            }
        case Activation::tanh: return std::tanh(x);
        case Activation::leaky_relu: return x >= 0.0 ? x : alpha * x;
        case Activation::linear: return x;
    }
    return x;
}

double activate_derivative(Activation kind, double x, double alpha) noexcept {
    switch (kind) {
        case Activation::sigmoid: {
            const double s = activate(Activation::sigmoid, x);
            return s * (1.0 - s);
        }
        case Activation::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::leaky_relu: return x >= 0.0 ? 1.0 : alpha;
        case Activation::linear: return 1.0;
    }
    return 1.0;
}

Tensor apply_activation(Activation kind, const Tensor& x, double alpha) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = activate(kind, x[i], alpha);
    return out;
}

Tensor init_params(const std::vector<std::size_t>& shape, Rng& rng, InitScheme scheme) {
    if (shape.empty() || std::find(shape.begin(), shape.end(), 0u) != shape.end()) {
        throw ArgumentError("init_params needs a non-empty shape with positive extents, got " +
                            shape_to_string(shape));
    }
    Tensor out(shape);
    if (scheme == InitScheme::zeros) return out;

    const double fan_out = static_cast<double>(shape[0]);
    const double fan_in = shape.size() == 1
                              ? fan_out
                              : static_cast<double>(element_count(shape) / shape[0]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : out.values()) v = rng.uniform(-limit, limit);
    return out;
}

GradCheckResult grad_check(const LossFn& loss_fn, const GradFn& analytic_grad,
                           TensorList params, double epsilon) {
    if (!(epsilon >= 1e-6 && epsilon <= 1e-4)) {
        throw ArgumentError("grad_check epsilon must lie in [1e-6, 1e-4]");
    }
    const TensorList analytic = analytic_grad(params);
    if (analytic.size() != params.size()) {
        throw ShapeError("analytic gradient has " + std::to_string(analytic.size()) +
                         " tensors, parameters have " + std::to_string(params.size()));
    }

    GradCheckResult result;
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!analytic[t].same_shape(params[t])) {
            throw ShapeError("analytic gradient " + std::to_string(t) + " has shape " +
                             shape_to_string(analytic[t].shape()) + ", parameter has " +
                             shape_to_string(params[t].shape()));
        }
        for (std::size_t i = 0; i < params[t].size(); ++i) {
            const double original = params[t][i];
            params[t][i] = original + epsilon;
            const double plus = loss_fn(params);
            params[t][i] = original - epsilon;
            const double minus = loss_fn(params);
            params[t][i] = original;
            if (!std::isfinite(plus) || !std::isfinite(minus)) {
                throw NumericError("grad_check: loss is not finite at tensor " +
                                   std::to_string(t) + " index " + std::to_string(i));
            }
            const double numeric = (plus - minus) / (2.0 * epsilon);
            const double a = analytic[t][i];
            const double scale = std::max({std::abs(a), std::abs(numeric), 1e-8});
            const double rel = std::abs(a - numeric) / scale;
            ++result.checked;
            if (rel > result.max_relative_error) {
                result = {rel, t, i, a, numeric, result.checked};
            }
        }
    }
    return result;
}

}  // namespace newscast
