#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace newscast {

/// Dense row-major tensor of 64-bit reals.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    void fill(double value) noexcept;
    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
    bool all_finite() const noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

using TensorList = std::vector<Tensor>;

/// Throws NumericError naming `what` when any element is NaN or infinite.
void require_finite(const Tensor& t, std::string_view what);

std::string shape_to_string(const std::vector<std::size_t>& shape);

/// Seeded generator backed by std::mt19937_64, whose output sequence is fixed
/// by the C++ standard. Distributions are implemented here rather than with
/// <random> distribution classes, which are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    /// Uniform integer in [0, n), unbiased.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

enum class Activation { sigmoid, tanh, leaky_relu, linear };

inline constexpr double kDefaultLeakyAlpha = 0.01;

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation kind) noexcept;

double activate(Activation kind, double x, double alpha = kDefaultLeakyAlpha) noexcept;
/// Derivative expressed in terms of the pre-activation `x`.
double activate_derivative(Activation kind, double x, double alpha = kDefaultLeakyAlpha) noexcept;
Tensor apply_activation(Activation kind, const Tensor& x, double alpha = kDefaultLeakyAlpha);

inline double sigmoid(double x) noexcept { return activate(Activation::sigmoid, x); }

enum class InitScheme { glorot_uniform, zeros };

/// Glorot bound uses fan_out = shape[0] and fan_in = product of the remaining
/// extents (fan_in = fan_out = shape[0] for rank-1 tensors).
Tensor init_params(const std::vector<std::size_t>& shape, Rng& rng, InitScheme scheme);

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
};

using LossFn = std::function<double(const TensorList&)>;
using GradFn = std::function<TensorList(const TensorList&)>;

/// Compares `analytic_grad(params)` against central differences of `loss_fn`
/// for every scalar in `params`. Relative error per scalar is
/// |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const LossFn& loss_fn, const GradFn& analytic_grad,
                           TensorList params, double epsilon = 1e-5);

}  // namespace newscast
