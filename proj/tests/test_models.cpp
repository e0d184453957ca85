#include <gtest/gtest.h>

#include <cmath>

#include "newscast/errors.hpp"
#include "newscast/models.hpp"
#include "newscast/training.hpp"

using namespace newscast;

namespace {

Tensor random_batch(const ModelParams& p, std::size_t n, Rng& rng) {
    Tensor batch(batch_shape(p, n));
    for (double& v : batch.values()) v = rng.uniform(0.0, 1.0);
    return batch;
}

double scalar_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Loss 0.5 * sum((pred - target)^2) and its analytic gradient via the model.
GradCheckResult check_model(ModelParams model, const Tensor& batch, const Tensor& target) {
    auto loss = [&](const TensorList& values) {
        ModelParams m = model;
        m.assign(values);
        const auto pred = predict(m, batch);
        double s = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) s += 0.5 * (pred[i] - target[i]) * (pred[i] - target[i]);
        return s;
    };
    auto analytic = [&](const TensorList& values) {
        ModelParams m = model;
        m.assign(values);
        auto fwd = model_forward(m, batch);
        Tensor up(fwd.predictions.shape());
        for (std::size_t i = 0; i < up.size(); ++i) up[i] = fwd.predictions[i] - target[i];
        return model_backward(m, fwd.cache, up);
    };
    return grad_check(loss, analytic, model.snapshot(), 1e-5);
}

}  // namespace

TEST(CountParams, MatchesLayerArithmetic) {
    Rng rng(42);
    // 4*50*(4+50)+200 + 2*(4*50*(50+50)+200) + 51
    EXPECT_EQ(count_params(make_model(Architecture::fused_lstm, rng)), 51451u);
    EXPECT_EQ(count_params(make_model(Architecture::price_lstm, rng)), 50851u);
    // 8*256+256 + 256*128+128 + 128*64+64 + 64+1 = 2304 + 32896 + 8256 + 65
    EXPECT_EQ(count_params(make_model(Architecture::dnn, rng)), 43521u);
}

TEST(MakeModel, LayerStructure) {
    Rng rng(42);
    const auto fused = make_model(Architecture::fused_lstm, rng);
    ASSERT_EQ(fused.lstm.size(), 3u);
    EXPECT_TRUE(fused.lstm[0].return_sequences);
    EXPECT_TRUE(fused.lstm[1].return_sequences);
    EXPECT_FALSE(fused.lstm[2].return_sequences);
    for (const auto& l : fused.lstm) EXPECT_EQ(l.units, 50u);
    EXPECT_EQ(fused.lstm[0].input_dim(), 4u);
    ASSERT_EQ(fused.dense.size(), 1u);
    EXPECT_EQ(fused.dense[0].out_dim(), 1u);
    EXPECT_EQ(fused.dense[0].activation, Activation::linear);
    for (double v : fused.lstm[0].b.values()) EXPECT_EQ(v, 0.0);

    const auto dnn = make_model(Architecture::dnn, rng);
    ASSERT_EQ(dnn.dense.size(), 4u);
    EXPECT_EQ(dnn.dense[0].out_dim(), 256u);
    EXPECT_EQ(dnn.dense[1].out_dim(), 128u);
    EXPECT_EQ(dnn.dense[2].out_dim(), 64u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(dnn.dense[i].activation, Activation::leaky_relu);
        EXPECT_DOUBLE_EQ(dnn.dense[i].alpha, 0.01);
    }
    EXPECT_EQ(dnn.dense[3].activation, Activation::linear);
}

TEST(ParseArchitecture, KnownAndUnknown) {
    EXPECT_EQ(parse_architecture("dnn"), Architecture::dnn);
    EXPECT_THROW(parse_architecture("gru"), ArgumentError);
}

TEST(LstmCell, ZeroWeightsGiveHalfGatesAndZeroState) {
    LstmLayerParams p{Tensor({12, 2}), Tensor({12, 3}), Tensor({12}), 3, false};
    const std::vector<double> x{0.7, -1.2}, zero(3, 0.0);
    const auto r = lstm_cell_step(p, x, zero, zero);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_DOUBLE_EQ(r.cache.gates[k], 0.5);
        EXPECT_DOUBLE_EQ(r.cache.gates[3 + k], 0.5);
        EXPECT_DOUBLE_EQ(r.cache.gates[6 + k], 0.0);
        EXPECT_DOUBLE_EQ(r.cache.gates[9 + k], 0.5);
        EXPECT_EQ(r.c[k], 0.0);
        EXPECT_EQ(r.h[k], 0.0);
    }
}

TEST(LstmCell, ForgetOneInputZeroCarriesCell) {
    const std::size_t u = 2;
    LstmLayerParams p{Tensor({8, 1}), Tensor({8, 2}), Tensor({8}), u, false};
    for (std::size_t k = 0; k < u; ++k) {
        p.b[k] = -60.0;     // input gate -> 0
        p.b[u + k] = 60.0;  // forget gate -> 1
    }
    const std::vector<double> c_prev{0.37, -1.4};
    const auto r = lstm_cell_step(p, std::vector<double>{0.9}, std::vector<double>{0.1, 0.2}, c_prev);
    EXPECT_EQ(r.c, c_prev);
}

TEST(LstmCell, MatchesScalarOracle) {
    Rng rng(42);
    const std::size_t u = 2, in = 3;
    LstmLayerParams p{init_params({4 * u, in}, rng, InitScheme::glorot_uniform),
                      init_params({4 * u, u}, rng, InitScheme::glorot_uniform), Tensor({4 * u}), u, false};
    for (double& v : p.b.values()) v = rng.uniform(-0.5, 0.5);
    const std::vector<double> x{0.3, -0.8, 0.5}, h{0.1, -0.2}, c{0.4, 0.05};

    const auto r = lstm_cell_step(p, x, h, c);

    // Independent scalar evaluation, gate by gate.
    for (std::size_t k = 0; k < u; ++k) {
        double pre[4];
        for (std::size_t gate = 0; gate < 4; ++gate) {
            const std::size_t row = gate * u + k;
            double z = p.b[row];
            for (std::size_t j = 0; j < in; ++j) z += p.W.at(row, j) * x[j];
            for (std::size_t j = 0; j < u; ++j) z += p.U.at(row, j) * h[j];
            pre[gate] = z;
        }
        const double i_g = scalar_sigmoid(pre[0]);
        const double f_g = scalar_sigmoid(pre[1]);
        const double g_g = std::tanh(pre[2]);
        const double o_g = scalar_sigmoid(pre[3]);
        const double c_new = f_g * c[k] + i_g * g_g;
        const double h_new = o_g * std::tanh(c_new);
        EXPECT_NEAR(r.c[k], c_new, 1e-14);
        EXPECT_NEAR(r.h[k], h_new, 1e-14);
    }
}

TEST(LstmCell, DimensionMismatchNamesLayer) {
    LstmLayerParams p{Tensor({8, 3}), Tensor({8, 2}), Tensor({8}), 2, false};
    try {
        lstm_cell_step(p, std::vector<double>{1.0}, std::vector<double>(2), std::vector<double>(2), "lstm7");
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("lstm7"), std::string::npos);
    }
}

TEST(LstmForward, ZeroLayerOutputsZerosOfRightShape) {
    LstmLayerParams seq{Tensor({20, 4}), Tensor({20, 5}), Tensor({20}), 5, true};
    Tensor x({8, 4}, 0.3);
    const auto out = lstm_forward(seq, x);
    EXPECT_EQ(out.shape(), (std::vector<std::size_t>{8, 5}));
    for (double v : out.values()) EXPECT_EQ(v, 0.0);

    seq.return_sequences = false;
    EXPECT_EQ(lstm_forward(seq, x).shape(), (std::vector<std::size_t>{5}));
}

TEST(LstmForward, StackedShapesAndLastStep) {
    Rng rng(42);
    const auto m = make_model(Architecture::fused_lstm, rng);
    Tensor x({8, 4});
    for (double& v : x.values()) v = rng.uniform();
    const auto a = lstm_forward(m.lstm[0], x);
    EXPECT_EQ(a.shape(), (std::vector<std::size_t>{8, 50}));
    const auto b = lstm_forward(m.lstm[1], a);
    EXPECT_EQ(b.shape(), (std::vector<std::size_t>{8, 50}));
    const auto c = lstm_forward(m.lstm[2], b);
    EXPECT_EQ(c.shape(), (std::vector<std::size_t>{50}));

    auto full = m.lstm[2];
    full.return_sequences = true;
    const auto all = lstm_forward(full, b);
    for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(c[k], all.at(7, k));
}

TEST(ModelForward, EmptyBatch) {
    Rng rng(1);
    const auto m = make_model(Architecture::fused_lstm, rng);
    const auto r = model_forward(m, Tensor({0, 8, 4}));
    EXPECT_EQ(r.predictions.shape(), (std::vector<std::size_t>{0, 1}));
}

TEST(ModelForward, ShapeMismatchRejected) {
    Rng rng(1);
    const auto fused = make_model(Architecture::fused_lstm, rng);
    EXPECT_THROW(model_forward(fused, Tensor({2, 8, 1})), ShapeError);
    EXPECT_THROW(model_forward(fused, Tensor({2, 7, 4})), ShapeError);
    const auto dnn = make_model(Architecture::dnn, rng);
    EXPECT_THROW(model_forward(dnn, Tensor({2, 8, 1})), ShapeError);
    EXPECT_NO_THROW(model_forward(dnn, Tensor({2, 8})));

    auto broken = fused;
    broken.lstm[1].U = Tensor({200, 49});
    EXPECT_THROW(model_forward(broken, Tensor({1, 8, 4})), ShapeError);
}

TEST(ModelForward, DnnMatchesScalarAffineChain) {
    Rng rng(5);
    ModelShape shape;
    shape.dnn_hidden = {3, 2};
    auto m = make_model(Architecture::dnn, rng, shape);
    for (auto* t : m.tensors()) {
        for (double& v : t->values()) v = rng.uniform(-1.0, 1.0);
    }
    m.standardizer.mean.assign(8, 0.25);
    m.standardizer.stddev.assign(8, 2.0);
    Tensor batch({1, 8});
    for (double& v : batch.values()) v = rng.uniform();

    std::vector<double> a(8);
    for (std::size_t k = 0; k < 8; ++k) a[k] = (batch[k] - 0.25) / 2.0;
    for (std::size_t l = 0; l < m.dense.size(); ++l) {
        const auto& d = m.dense[l];
        std::vector<double> next(d.out_dim());
        for (std::size_t r = 0; r < d.out_dim(); ++r) {
            double z = d.b[r];
            for (std::size_t c = 0; c < d.in_dim(); ++c) z += d.W.at(r, c) * a[c];
            next[r] = l + 1 < m.dense.size() ? (z >= 0 ? z : 0.01 * z) : z;
        }
        a = next;
    }
    EXPECT_NEAR(predict(m, batch)[0], a[0], 1e-14);
}

TEST(ModelForward, PermutationInvariantAndDeterministic) {
    Rng rng(42);
    const auto m = make_model(Architecture::fused_lstm, rng);
    const auto batch = random_batch(m, 4, rng);
    Tensor swapped(batch.shape());
    const std::size_t stride = 32;
    const std::size_t order[] = {2, 0, 3, 1};
    for (std::size_t i = 0; i < 4; ++i) {
        std::copy(batch.data() + order[i] * stride, batch.data() + (order[i] + 1) * stride, swapped.data() + i * stride);
    }
    const auto p = predict(m, batch);
    const auto q = predict(m, swapped);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(q[i], p[order[i]]);
    EXPECT_EQ(predict(m, batch), p);
}

TEST(ModelForward, ZeroLstmStackOutputsHeadBias) {
    Rng rng(42);
    auto m = make_model(Architecture::price_lstm, rng);
    for (auto& l : m.lstm) {
        l.W.fill(0.0);
        l.U.fill(0.0);
        l.b.fill(0.0);
    }
    m.dense[0].b[0] = 0.731;
    const auto pred = predict(m, random_batch(m, 5, rng));
    for (double v : pred.values()) EXPECT_EQ(v, 0.731);
}

TEST(ModelForward, FusedReducesToPriceWhenSentimentColumnsZeroed) {
    Rng rng(42);
    const auto price = make_model(Architecture::price_lstm, rng);
    auto fused = make_model(Architecture::fused_lstm, rng);
    for (std::size_t l = 0; l < 3; ++l) {
        fused.lstm[l].U = price.lstm[l].U;
        fused.lstm[l].b = price.lstm[l].b;
        if (l > 0) fused.lstm[l].W = price.lstm[l].W;
    }
    for (std::size_t r = 0; r < 200; ++r) {
        for (std::size_t c = 0; c < 3; ++c) fused.lstm[0].W.at(r, c) = 0.0;
        fused.lstm[0].W.at(r, 3) = price.lstm[0].W.at(r, 0);
    }
    fused.dense = price.dense;

    const auto closes = random_batch(price, 3, rng);
    Tensor fused_batch({3, 8, 4});
    for (std::size_t n = 0; n < 3; ++n) {
        for (std::size_t t = 0; t < 8; ++t) {
            fused_batch.at(n, t, 0) = 0.2;
            fused_batch.at(n, t, 1) = 0.5;
            fused_batch.at(n, t, 2) = 0.3;
            fused_batch.at(n, t, 3) = closes.at(n, t, 0);
        }
    }
    const auto a = predict(price, closes);
    const auto b = predict(fused, fused_batch);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(ModelBackward, ZeroAndLinearUpstream) {
    Rng rng(42);
    for (auto arch : {Architecture::fused_lstm, Architecture::price_lstm, Architecture::dnn}) {
        const auto m = make_model(arch, rng);
        const auto fwd = model_forward(m, random_batch(m, 3, rng));
        const auto zero = model_backward(m, fwd.cache, Tensor({3, 1}));
        for (const auto& g : zero) {
            for (double v : g.values()) ASSERT_EQ(v, 0.0);
        }
        const Tensor up({3, 1}, {0.3, -0.7, 1.1});
        const Tensor up2({3, 1}, {0.6, -1.4, 2.2});
        const auto g1 = model_backward(m, fwd.cache, up);
        const auto g2 = model_backward(m, fwd.cache, up2);
        for (std::size_t t = 0; t < g1.size(); ++t) {
            for (std::size_t i = 0; i < g1[t].size(); ++i) ASSERT_NEAR(g2[t][i], 2.0 * g1[t][i], 1e-15 + 1e-12 * std::abs(g1[t][i]));
        }
    }
}

TEST(ModelBackward, StaleOrMissingCacheRejected) {
    Rng rng(42);
    auto m = make_model(Architecture::price_lstm, rng);
    EXPECT_THROW(model_backward(m, ForwardCache{}, Tensor({0, 1})), StateError);
    const auto fwd = model_forward(m, random_batch(m, 2, rng));
    m.dense[0].b[0] += 1.0;
    EXPECT_THROW(model_backward(m, fwd.cache, Tensor({2, 1}, 1.0)), StateError);
}

TEST(ModelBackward, GradientCheckSmallModels) {
    ModelShape small;
    small.lstm_units = 4;
    small.dnn_hidden = {6, 5, 4};
    for (auto arch : {Architecture::fused_lstm, Architecture::price_lstm, Architecture::dnn}) {
        Rng rng(42);
        auto m = make_model(arch, rng, small);
        for (auto* t : m.tensors()) {
            for (double& v : t->values()) v += rng.uniform(-0.1, 0.1);
        }
        if (arch == Architecture::dnn) {
            m.standardizer.mean.assign(8, 0.5);
            m.standardizer.stddev.assign(8, 0.3);
        }
        const auto batch = random_batch(m, 3, rng);
        Tensor target({3, 1});
        for (double& v : target.values()) v = rng.uniform();
        const auto r = check_model(m, batch, target);
        EXPECT_LT(r.max_relative_error, 1e-4) << architecture_name(arch) << " worst tensor " << r.worst_tensor;
    }
}

TEST(LstmBackward, SingleLayerMatchesModelPath) {
    Rng rng(42);
    ModelShape small;
    small.lstm_units = 3;
    small.lstm_layers = 1;
    const auto m = make_model(Architecture::price_lstm, rng, small);
    const auto batch = random_batch(m, 1, rng);
    const auto fwd = model_forward(m, batch);
    const auto grads = model_backward(m, fwd.cache, Tensor({1, 1}, 1.0));

    // Same gradient through the public layer API: dLoss/dh_last = head weights.
    Tensor d_out({3});
    for (std::size_t k = 0; k < 3; ++k) d_out[k] = m.dense[0].W[k];
    const auto layer = lstm_backward(m.lstm[0], fwd.cache.samples[0].lstm[0], d_out);
    for (std::size_t i = 0; i < layer.dW.size(); ++i) EXPECT_DOUBLE_EQ(layer.dW[i], grads[0][i]);
    for (std::size_t i = 0; i < layer.dU.size(); ++i) EXPECT_DOUBLE_EQ(layer.dU[i], grads[1][i]);
    for (std::size_t i = 0; i < layer.db.size(); ++i) EXPECT_DOUBLE_EQ(layer.db[i], grads[2][i]);
}
