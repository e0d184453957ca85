#include <gtest/gtest.h>

#include <cmath>

#include "newscast/errors.hpp"
#include "newscast/training.hpp"

using namespace newscast;

namespace {

std::vector<PriceBar> linear_bars(std::size_t n) {
    std::vector<PriceBar> bars;
    Date d = Date::from_ymd(2021, 1, 4);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = 50.0 + 0.5 * static_cast<double>(i);
        bars.push_back({d, "LIN", c, c, c, c, 1.0});
        d = d.plus_days(1);
    }
    return bars;
}

WindowedDataset linear_dataset(std::size_t n, bool fused = false) {
    std::map<std::string, std::vector<PriceBar>> by{{"LIN", linear_bars(n)}};
    WindowOptions opts;
    opts.fused = fused;
    return prepare_windows(by, nullptr, opts);
}

}  // namespace

TEST(Mse, Examples) {
    const Tensor p({2, 1}, {1.0, 3.0}), t({2, 1}, {0.0, 1.0});
    const auto r = mse_loss(p, t);
    EXPECT_DOUBLE_EQ(r.loss, 2.5);
    EXPECT_DOUBLE_EQ(r.grad[0], 1.0);
    EXPECT_DOUBLE_EQ(r.grad[1], 2.0);

    const auto same = mse_loss(p, p);
    EXPECT_EQ(same.loss, 0.0);
    for (double g : same.grad.values()) EXPECT_EQ(g, 0.0);

    EXPECT_THROW(mse_loss(p, Tensor({3, 1})), ShapeError);
    EXPECT_THROW(mse_loss(Tensor({0, 1}), Tensor({0, 1})), ShapeError);
}

TEST(Mse, GradientMatchesCentralDifferences) {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.index(100);
        Tensor p({n, 1}), t({n, 1});
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = rng.normal();
            t[i] = rng.normal();
        }
        const auto r = mse_loss(p, t);
        for (std::size_t i = 0; i < n; ++i) {
            // The loss is quadratic in each prediction, so central differences
            // have no truncation error and a wide step keeps rounding small.
            const double h = 0.25;
            Tensor up = p, down = p;
            up[i] += h;
            down[i] -= h;
            const double fd = (mse_loss(up, t).loss - mse_loss(down, t).loss) / (2 * h);
            const double rel = std::abs(fd - r.grad[i]) / std::max({std::abs(fd), std::abs(r.grad[i]), 1e-8});
            ASSERT_LT(rel, 1e-10) << "n=" << n << " i=" << i;
        }
    }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    Rng rng(1);
    auto m = make_model(Architecture::price_lstm, rng, ModelShape{.lstm_units = 3});
    const auto before = m.snapshot();
    auto state = AdamState::for_params(m);
    adam_step(m, m.zeros_like(), state);
    EXPECT_EQ(m.snapshot(), before);
    EXPECT_EQ(state.t, 1u);

    // Any state whose first moment is zero: v and t arbitrary.
    for (auto& v : state.v) {
        for (double& x : v.values()) x = rng.uniform(0.0, 5.0);
    }
    state.t = 37;
    adam_step(m, m.zeros_like(), state);
    EXPECT_EQ(m.snapshot(), before);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
    for (double g : {1e-6, -0.3, 4.0, -250.0}) {
        Tensor p({1}, {2.0});
        Tensor* ptrs[] = {&p};
        AdamState state;
        state.m = {Tensor({1})};
        state.v = {Tensor({1})};
        adam_step(ptrs, {Tensor({1}, {g})}, state);
        const double step = 2.0 - p[0];
        EXPECT_NEAR(std::abs(step), 0.001, 0.001 * std::max(1e-2, 1e-8 / std::abs(g)) + 1e-12) << g;
        EXPECT_EQ(std::signbit(step), std::signbit(g));
    }
}

TEST(Adam, TenStepsOnSquareMatchScalarOracle) {
    Tensor p({1}, {1.0});
    Tensor* ptrs[] = {&p};
    AdamState state;
    state.m = {Tensor({1})};
    state.v = {Tensor({1})};

    double q = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 10; ++t) {
        adam_step(ptrs, {Tensor({1}, {2.0 * p[0]})}, state);
        const double g = 2.0 * q;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mhat = m / (1.0 - std::pow(0.9, t));
        const double vhat = v / (1.0 - std::pow(0.999, t));
        q -= 0.001 * mhat / (std::sqrt(vhat) + 1e-8);
        ASSERT_NEAR(p[0], q, 1e-12) << "step " << t;
    }
    EXPECT_EQ(state.t, 10u);
}

TEST(Adam, NonFiniteGradientNamesBlockAndLeavesParams) {
    Rng rng(1);
    auto m = make_model(Architecture::price_lstm, rng, ModelShape{.lstm_units = 3});
    const auto before = m.snapshot();
    auto grads = m.zeros_like();
    grads[4][0] = std::nan("");
    auto state = AdamState::for_params(m);
    try {
        adam_step(m, grads, state);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find(m.tensor_names()[4]), std::string::npos);
    }
    EXPECT_EQ(m.snapshot(), before);
}

TEST(Train, ZeroLearningRateKeepsInitialParameters) {
    const auto d = linear_dataset(60);
    Rng rng(42);
    const auto model = make_model(Architecture::price_lstm, rng, ModelShape{.lstm_units = 4});
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.adam.learning_rate = 0.0;
    const auto r = train(model, d.train, d.validation, cfg);
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.best.params.snapshot(), model.snapshot());
    EXPECT_EQ(r.best.epoch, 1u);
}

TEST(Train, LinearSeriesImprovesAndBestIsHistoryMinimum) {
    const auto d = linear_dataset(120);
    Rng rng(42);
    const auto model = make_model(Architecture::price_lstm, rng);
    TrainConfig cfg;  // 100 epochs, seed 42
    const auto r = train(model, d.train, d.validation, cfg, d.scalers);
    ASSERT_EQ(r.history.size(), 100u);
    EXPECT_LT(r.history.back().val_loss, r.initial_val_loss);

    double best = r.history[0].val_loss;
    std::size_t best_epoch = 1;
    for (const auto& h : r.history) {
        if (h.val_loss < best) {
            best = h.val_loss;
            best_epoch = h.epoch;
        }
    }
    EXPECT_EQ(r.best.validation_loss, best);
    EXPECT_EQ(r.best.epoch, best_epoch);
    EXPECT_NEAR(evaluate_mse(r.best.params, d.validation), r.best.validation_loss, 1e-12);
    EXPECT_EQ(r.best.scalers, d.scalers);
}

TEST(Train, DeterministicForSeed) {
    const auto d = linear_dataset(60, true);
    Rng rng(42);
    const auto model = make_model(Architecture::fused_lstm, rng, ModelShape{.lstm_units = 6});
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    const auto a = train(model, d.train, d.validation, cfg);
    const auto b = train(model, d.train, d.validation, cfg);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
        EXPECT_EQ(a.history[i].val_loss, b.history[i].val_loss);
    }
    EXPECT_EQ(serialize_checkpoint(a.best), serialize_checkpoint(b.best));

    cfg.seed = 43;
    const auto c = train(model, d.train, d.validation, cfg);
    EXPECT_NE(c.history.back().train_loss, a.history.back().train_loss);
}

TEST(Train, DnnGetsStandardizerFromTrainingSet) {
    const auto d = linear_dataset(60);
    Rng rng(42);
    const auto model = make_model(Architecture::dnn, rng, ModelShape{.dnn_hidden = {8, 4}});
    TrainConfig cfg;
    cfg.epochs = 2;
    const auto r = train(model, d.train, d.validation, cfg);
    const auto expected = fit_standardizer(d.train, 8);
    EXPECT_EQ(r.best.params.standardizer.mean, expected.mean);
    EXPECT_EQ(r.best.params.standardizer.stddev, expected.stddev);
}

TEST(Train, ConfigValidation) {
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    const auto d = linear_dataset(60);
    Rng rng(1);
    EXPECT_THROW(train(make_model(Architecture::price_lstm, rng), {}, d.validation, TrainConfig{}), ArgumentError);
}

TEST(RollingForecast, HorizonZeroTruncationAndEquivalence) {
    const auto bars = linear_bars(40);
    Rng rng(42);
    Checkpoint ckpt;
    ckpt.params = make_model(Architecture::price_lstm, rng, ModelShape{.lstm_units = 5});
    std::vector<double> closes;
    for (std::size_t i = 0; i < 30; ++i) closes.push_back(bars[i].close);
    ckpt.scalers["LIN"] = fit_minmax(closes);

    EXPECT_TRUE(rolling_forecast(ckpt, bars, 30, nullptr, 0).rows.empty());
    EXPECT_THROW(rolling_forecast(ckpt, bars, 7, nullptr, 5), ArgumentError);

    const auto full = rolling_forecast(ckpt, bars, 30, nullptr, 10);
    EXPECT_EQ(full.rows.size(), 10u);
    EXPECT_TRUE(full.warnings.empty());

    const auto cut = rolling_forecast(ckpt, bars, 30, nullptr, 100);
    EXPECT_EQ(cut.rows.size(), 10u);
    EXPECT_EQ(cut.warnings.size(), 1u);

    const auto series = NormalizedSeries::from_bars(bars, ckpt.scalers["LIN"]);
    for (std::size_t k = 0; k < full.rows.size(); ++k) {
        const auto sample = make_window(series, 30 + k, nullptr);
        const std::vector<WindowSample> one{sample};
        const double y = predict(ckpt.params, make_batch(ckpt.params, one))[0];
        EXPECT_EQ(full.rows[k].date, bars[30 + k].date);
        EXPECT_EQ(full.rows[k].actual_close, bars[30 + k].close);
        EXPECT_NEAR(full.rows[k].predicted_close, ckpt.scalers["LIN"].denormalize(y), 1e-12);
        if (k > 0) {
            EXPECT_LT(full.rows[k - 1].date, full.rows[k].date);
        }
    }
}
