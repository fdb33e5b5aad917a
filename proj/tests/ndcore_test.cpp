#include <cmath>

#include "ald/autodiff.hpp"
#include "ald/params.hpp"
#include "gtest/gtest.h"

using namespace ald;

namespace {

Tensor t1(std::vector<double> v) {
    const int n = static_cast<int>(v.size());
    return Tensor({n}, std::move(v));
}

Tensor t2(int rows, int cols, std::vector<double> v) { return Tensor({rows, cols}, std::move(v)); }

}  // namespace

TEST(Conv1d, HandConvolution) {
    Tape tape;
    auto in = tape.input(t2(4, 1, {1, 2, 4, 7}));
    auto filt = tape.input(Tensor({2, 1, 1}, {1, -1}));
    auto bias = tape.input(t1({0}));
    const Tensor& out = tape.value(tape.conv1d(in, filt, bias));
    EXPECT_EQ(out.shape, (std::vector<int>{3, 1}));
    EXPECT_EQ(out.data, (std::vector<double>{-1, -2, -3}));
}

TEST(Conv1d, IdentityKernelAndBias) {
    Tape tape;
    auto in = tape.input(t2(4, 1, {1, 2, 4, 7}));
    auto identity = tape.input(Tensor({1, 1, 1}, {1}));
    auto zero_bias = tape.input(t1({0}));
    EXPECT_EQ(tape.value(tape.conv1d(in, identity, zero_bias)).data, (std::vector<double>{1, 2, 4, 7}));

    auto zeros = tape.input(t2(5, 2, std::vector<double>(10, 0.0)));
    auto filt = tape.input(Tensor({2, 2, 3}, std::vector<double>(12, 0.37)));
    auto bias = tape.input(t1({1.5, -2.0, 0.25}));
    const Tensor& out = tape.value(tape.conv1d(zeros, filt, bias));
    for (int t = 0; t < out.rows(); ++t)
        for (int m = 0; m < out.cols(); ++m) EXPECT_DOUBLE_EQ(out.at(t, m), bias == 0 ? 0 : tape.value(bias).data[static_cast<std::size_t>(m)]);
}

TEST(Conv1d, LinearityProperty) {
    Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const int L = 6, D = 3, W = 2, M = 4;
        auto rand_vec = [&rng](int n) {
            std::vector<double> v(static_cast<std::size_t>(n));
            for (double& x : v) x = rng.next_uniform(-2, 2);
            return v;
        };
        const double a = rng.next_uniform(-2, 2), b = rng.next_uniform(-2, 2);
        const std::vector<double> x = rand_vec(L * D), y = rand_vec(L * D), f = rand_vec(W * D * M);
        std::vector<double> mix(static_cast<std::size_t>(L * D));
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
        Tape tape;
        auto filt = tape.input(Tensor({W, D, M}, f));
        auto zero = tape.input(Tensor({M}));
        const Tensor& cx = tape.value(tape.conv1d(tape.input(t2(L, D, x)), filt, zero));
        const Tensor& cy = tape.value(tape.conv1d(tape.input(t2(L, D, y)), filt, zero));
        const Tensor& cmix = tape.value(tape.conv1d(tape.input(t2(L, D, mix)), filt, zero));
        for (std::size_t i = 0; i < cmix.data.size(); ++i)
            EXPECT_NEAR(cmix.data[i], a * cx.data[i] + b * cy.data[i], 1e-12);
    }
}

TEST(Conv1d, ShortInputRejected) {
    Tape tape;
    auto in = tape.input(t2(2, 1, {1, 2}));
    auto filt = tape.input(Tensor({3, 1, 1}, {1, 1, 1}));
    auto bias = tape.input(t1({0}));
    EXPECT_THROW(tape.conv1d(in, filt, bias), DataError);
}

TEST(MaxPool1d, Windows) {
    Tape tape;
    EXPECT_EQ(tape.value(tape.maxpool1d(tape.input(t2(4, 1, {1, 3, 2, 5})), 2, 2)).data,
              (std::vector<double>{3, 5}));
    EXPECT_EQ(tape.value(tape.maxpool1d(tape.input(t2(4, 1, {1, 3, 2, 5})), 4, 4)).data,
              (std::vector<double>{5}));
    EXPECT_EQ(tape.value(tape.maxpool1d(tape.input(t2(6, 1, {5, 1, 1, 1, 1, 9})), 3, 3)).data,
              (std::vector<double>{5, 9}));
    EXPECT_THROW(tape.maxpool1d(tape.input(t2(2, 1, {1, 2})), 3, 3), DataError);
}

TEST(GlobalMaxPool, PerChannelMax) {
    Tape tape;
    EXPECT_EQ(tape.value(tape.global_maxpool(tape.input(t2(3, 2, {1, 9, 4, 2, 3, 3})))).data,
              (std::vector<double>{4, 9}));
    EXPECT_EQ(tape.value(tape.global_maxpool(tape.input(t2(1, 3, {7, -1, 2})))).data,
              (std::vector<double>{7, -1, 2}));
}

TEST(GlobalMaxPool, PermutationInvariant) {
    Rng rng(5);
    std::vector<double> data(24);
    for (double& x : data) x = rng.next_uniform(-3, 3);
    Tape tape;
    const Tensor base = tape.value(tape.global_maxpool(tape.input(t2(8, 3, data))));
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> perm(8);
        for (int i = 0; i < 8; ++i) perm[static_cast<std::size_t>(i)] = i;
        rng.shuffle(perm);
        std::vector<double> shuffled(24);
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 3; ++c)
                shuffled[static_cast<std::size_t>(r) * 3 + c] = data[static_cast<std::size_t>(perm[static_cast<std::size_t>(r)]) * 3 + c];
        EXPECT_EQ(tape.value(tape.global_maxpool(tape.input(t2(8, 3, shuffled)))).data, base.data);
    }
}

TEST(GlobalMaxPool, TieRoutesGradientToFirst) {
    ParamStore store;
    store.create("x.W", {3, 1}).fill(7.0);
    Tape tape(&store);
    auto pooled = tape.global_maxpool(tape.param("x.W"));
    tape.backward(pooled, 1.0);
    EXPECT_EQ(store.entry("x.W").grad.data, (std::vector<double>{1, 0, 0}));
}

TEST(Dense, HandExamples) {
    Tape tape;
    // identity weight, zero bias
    auto in = tape.input(t1({3, -4}));
    auto eye = tape.input(t2(2, 2, {1, 0, 0, 1}));
    auto zero = tape.input(t1({0, 0}));
    EXPECT_EQ(tape.value(tape.dense(in, eye, zero)).data, (std::vector<double>{3, -4}));
    // zero weight, bias passthrough
    auto zw = tape.input(t2(2, 2, {0, 0, 0, 0}));
    auto bias = tape.input(t1({5, 6}));
    EXPECT_EQ(tape.value(tape.dense(in, zw, bias)).data, (std::vector<double>{5, 6}));
    // hand multiply: [1,2] * [[1,0],[1,1]] + [0,1] = [3,3]
    auto x = tape.input(t1({1, 2}));
    auto w = tape.input(t2(2, 2, {1, 0, 1, 1}));
    auto b = tape.input(t1({0, 1}));
    EXPECT_EQ(tape.value(tape.dense(x, w, b)).data, (std::vector<double>{3, 3}));
    EXPECT_THROW(tape.dense(tape.input(t1({1, 2, 3})), w, b), DataError);
}

TEST(SparseDense, AgreesWithDenseOnExpandedInput) {
    Rng rng(9);
    const int F = 12, K = 3;
    std::vector<double> wdata(F * K);
    for (double& x : wdata) x = rng.next_uniform(-1, 1);
    const std::vector<std::pair<int, int>> items = {{1, 2}, {5, 1}, {10, 4}};
    std::vector<double> dense_in(F, 0.0);
    for (auto [i, c] : items) dense_in[static_cast<std::size_t>(i)] = c;
    Tape tape;
    auto w = tape.input(t2(F, K, wdata));
    auto b = tape.input(t1({0.1, -0.2, 0.3}));
    EXPECT_EQ(tape.value(tape.sparse_dense(items, w, b)).data,
              tape.value(tape.dense(tape.input(t1(dense_in)), w, b)).data);
}

TEST(ReluDropout, Basics) {
    Tape tape;
    auto in = tape.input(t1({-1, 0, 2.5}));
    EXPECT_EQ(tape.value(tape.relu(in)).data, (std::vector<double>{0, 0, 2.5}));

    Rng rng(3);
    EXPECT_EQ(tape.value(tape.dropout(in, 0.0, Mode::train, rng)).data, tape.value(in).data);
    EXPECT_EQ(tape.value(tape.dropout(in, 0.5, Mode::infer, rng)).data, tape.value(in).data);
    EXPECT_THROW(tape.dropout(in, 1.0, Mode::train, rng), DataError);
}

// Inverted dropout keeps the expectation: with 1e5 unit inputs at rate 0.5
// each survivor is scaled to 2, so the mean stays within 3 binomial standard
// errors of 1.
TEST(ReluDropout, InvertedDropoutMean) {
    const int n = 100000;
    Tape tape;
    auto in = tape.input(t1(std::vector<double>(n, 1.0)));
    Rng rng(1357);
    const Tensor& out = tape.value(tape.dropout(in, 0.5, Mode::train, rng));
    double mean = 0.0;
    for (double x : out.data) mean += x / n;
    const double sigma = 1.0 / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(mean, 1.0, 3.0 * sigma);
}

TEST(SoftmaxXent, HandValues) {
    Tape tape;
    auto uniform = tape.softmax_xent(tape.input(t1({0, 0, 0})), 1);
    EXPECT_NEAR(tape.scalar(uniform), std::log(3.0), 1e-12);

    auto saturated = tape.softmax_xent(tape.input(t1({100, 0, 0})), 0);
    EXPECT_NEAR(tape.scalar(saturated), 0.0, 1e-10);

    auto hand = tape.softmax_xent(tape.input(t1({1, 2, 3})), 2);
    EXPECT_NEAR(tape.scalar(hand), std::log(1.0 + std::exp(-1.0) + std::exp(-2.0)), 1e-12);
    EXPECT_NEAR(tape.scalar(hand), 0.4076, 5e-5);

    EXPECT_THROW(tape.softmax_xent(tape.input(t1({1, 2, 3})), 3), DataError);
}

TEST(SoftmaxXent, ProbsSumToOne) {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> logits(2 + rng.next_below(4));
        // gaps beyond ~36 nats saturate to exactly 1.0 in double precision
        for (double& x : logits) x = rng.next_uniform(-15, 15);
        const auto probs = Tape::softmax(logits);
        double sum = 0.0;
        for (double p : probs) {
            EXPECT_GT(p, 0.0);
            EXPECT_LT(p, 1.0);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-6);
    }
}

TEST(Backward, SquareFunction) {
    // f(w) = w^2 via dense(in=w, W=w): gradient 2w = 6 at w=3.
    ParamStore store;
    store.create("w.W", {1, 1}).data = {3.0};
    store.create("unused.W", {2, 2}).fill(1.0);
    Tape tape(&store);
    auto w = tape.param("w.W");
    auto out = tape.dense(w, w, tape.input(t1({0})));
    EXPECT_DOUBLE_EQ(tape.scalar(out), 9.0);
    tape.backward(out, 1.0);
    EXPECT_DOUBLE_EQ(store.entry("w.W").grad.data[0], 6.0);
    // loss independent of a parameter: exactly zero gradient
    for (double g : store.entry("unused.W").grad.data) EXPECT_EQ(g, 0.0);
    EXPECT_TRUE(store.grads_populated());
}

TEST(Backward, WithoutForwardRejected) {
    Tape tape;
    EXPECT_THROW(tape.backward(0, 1.0), NumericError);
    Tape tape2;
    auto vec = tape2.input(t1({1, 2}));
    EXPECT_THROW(tape2.backward(vec, 1.0), NumericError);  // non-scalar loss
}

TEST(AddL2, PenaltyAndGradient) {
    ParamStore store;
    store.create("fc.W", {2}).data = {3.0, 4.0};
    store.create("fc.b", {2}).data = {9.0, 9.0};
    store.create("embed.E", {2, 1}, false).data = {5.0, 5.0};
    store.zero_grads();
    EXPECT_DOUBLE_EQ(add_l2(1.25, store, 0.0), 1.25);
    EXPECT_DOUBLE_EQ(add_l2(0.0, store, 1.0), 25.0);
    EXPECT_EQ(store.entry("fc.W").grad.data, (std::vector<double>{6.0, 8.0}));   // 2*lambda*w
    for (double g : store.entry("fc.b").grad.data) EXPECT_EQ(g, 0.0);            // biases excluded
    EXPECT_DOUBLE_EQ(l2_penalty(store, 2.0), 50.0);
}

TEST(Adam, ZeroGradNoMove) {
    ParamStore store;
    store.create("p.W", {3}).data = {1.0, -2.0, 0.5};
    store.zero_grads();
    store.note_grads_populated();
    AdamHyper hyper;
    adam_step(store, hyper);
    EXPECT_EQ(store.entry("p.W").value.data, (std::vector<double>{1.0, -2.0, 0.5}));
    EXPECT_EQ(hyper.t, 1);
}

TEST(Adam, FirstStepClosedForm) {
    ParamStore store;
    store.create("p.W", {2}).data = {1.0, 1.0};
    store.zero_grads();
    store.entry("p.W").grad.data = {0.3, -4.0};
    store.note_grads_populated();
    AdamHyper hyper;  // defaults: alpha 1e-3, eps 1e-8
    adam_step(store, hyper);
    // first step: m_hat = g, v_hat = g^2, so dw = -alpha * g / (|g| + eps)
    EXPECT_NEAR(store.entry("p.W").value.data[0], 1.0 - 1e-3 * 0.3 / (0.3 + 1e-8), 1e-15);
    EXPECT_NEAR(store.entry("p.W").value.data[1], 1.0 + 1e-3 * 4.0 / (4.0 + 1e-8), 1e-15);
}

// Two steps under a constant gradient: replay the moment recurrence by hand
// and compare; the step magnitude must not grow.
TEST(Adam, ConstantGradientRecurrence) {
    const double g = 0.7, alpha = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ParamStore store;
    store.create("p.W", {1}).data = {0.0};
    AdamHyper hyper;
    std::vector<double> positions;
    for (int step = 0; step < 2; ++step) {
        store.zero_grads();
        store.entry("p.W").grad.data = {g};
        store.note_grads_populated();
        adam_step(store, hyper);
        positions.push_back(store.entry("p.W").value.data[0]);
    }
    double m = 0, v = 0, w = 0;
    for (int t = 1; t <= 2; ++t) {
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        w -= alpha * mh / (std::sqrt(vh) + eps);
        EXPECT_DOUBLE_EQ(positions[static_cast<std::size_t>(t - 1)], w);
    }
    const double d1 = std::fabs(positions[0]);
    const double d2 = std::fabs(positions[1] - positions[0]);
    EXPECT_LE(d2, d1 * (1.0 + 1e-9));
    EXPECT_NEAR(d1, alpha, alpha * 1e-6);  // ~ -alpha * sign(g)
    EXPECT_NEAR(d2, alpha, alpha * 1e-6);
}

TEST(Adam, UnsetGradsRejectedAndFrozenUntouched) {
    ParamStore store;
    store.create("p.W", {1}).data = {2.0};
    store.create("frozen.E", {1}, false).data = {3.0};
    store.zero_grads();
    AdamHyper hyper;
    EXPECT_THROW(adam_step(store, hyper), NumericError);
    store.entry("p.W").grad.data = {1.0};
    store.note_grads_populated();
    adam_step(store, hyper);
    EXPECT_DOUBLE_EQ(store.entry("frozen.E").value.data[0], 3.0);
    EXPECT_NE(store.entry("p.W").value.data[0], 2.0);
    // grads zeroed after the step
    EXPECT_FALSE(store.grads_populated());
    EXPECT_EQ(store.entry("p.W").grad.data[0], 0.0);
}

TEST(GradCheck, QuadraticToy) {
    ParamStore store;
    store.create("q.W", {4}).data = {1.0, -2.0, 0.5, 3.0};
    const std::vector<double> target = {2.0, 1.0, -1.0, 0.0};
    auto loss_fn = [&](bool want_grad) {
        auto& e = store.entry("q.W");
        double loss = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            const double d = e.value.data[i] - target[i];
            loss += d * d;
            if (want_grad) e.grad.data[i] += 2.0 * d;
        }
        if (want_grad) store.note_grads_populated();
        return loss;
    };
    const GradCheckReport report = grad_check(loss_fn, store, 1e-5, 20, 11);
    EXPECT_LT(report.max_rel_err, 1e-8);
    EXPECT_EQ(report.coords_checked, 4);

    const GradCheckReport corrupted = grad_check(loss_fn, store, 1e-5, 20, 11, /*corrupt_sign=*/true);
    EXPECT_GT(corrupted.max_rel_err, 0.1);
}

TEST(Embedding, GatherAndFrozenRows) {
    ParamStore store;
    store.create("embed.E", {3, 2}, false).data = {0, 0, 1, 2, 3, 4};
    Tape tape(&store);
    auto rows = tape.embedding({2, 0, 1}, "embed.E");
    EXPECT_EQ(tape.value(rows).data, (std::vector<double>{3, 4, 0, 0, 1, 2}));
    EXPECT_THROW(tape.embedding({5}, "embed.E"), DataError);
}

TEST(Embedding, TrainableSkipsPadRow) {
    ParamStore store;
    store.create("ft.E", {3, 2}, true).data = {9, 9, 1, 2, 3, 4};
    store.zero_grads();
    Tape tape(&store);
    auto rows = tape.embedding({0, 2, 2}, "ft.E");
    auto pooled = tape.mean_rows(rows);
    auto w = tape.input(t2(2, 1, {1, 1}));
    auto out = tape.dense(pooled, w, tape.input(t1({0})));
    tape.backward(out, 1.0);
    const auto& g = store.entry("ft.E").grad.data;
    EXPECT_EQ(g[0], 0.0);  // <pad> row never accumulates
    EXPECT_EQ(g[1], 0.0);
    EXPECT_NEAR(g[4], 2.0 / 3.0, 1e-15);  // row 2 used twice, mean over 3 rows
}

TEST(MeanRows, Average) {
    Tape tape;
    EXPECT_EQ(tape.value(tape.mean_rows(tape.input(t2(2, 2, {1, 2, 3, 4})))).data, (std::vector<double>{2, 3}));
}

TEST(SquaredHinge, ValueAndZeroAtMargin) {
    Tape tape;
    // gold 0: y = (+1, -1); s = (2, -3) -> margins (1-2, 1-3) -> both clamped
    auto comfortable = tape.squared_hinge_ovr(tape.input(t1({2, -3})), 0);
    EXPECT_DOUBLE_EQ(tape.scalar(comfortable), 0.0);
    // s = (0.5, 0.5): margins (0.5, 1.5) -> 0.25 + 2.25
    auto mixed = tape.squared_hinge_ovr(tape.input(t1({0.5, 0.5})), 0);
    EXPECT_DOUBLE_EQ(tape.scalar(mixed), 0.25 + 2.25);
}

TEST(Determinism, IdenticalSeedsIdenticalGrads) {
    auto run = [](std::uint64_t seed) {
        ParamStore store;
        Rng init(seed);
        init_uniform_glorot(store.create("fc.W", {6, 3}), 6, 3, init);
        store.create("fc.b", {3});
        store.zero_grads();
        Rng dropout_rng(seed + 1);
        Tape tape(&store);
        auto in = tape.input(t1({0.5, -1, 2, 0.25, -0.75, 1.5}));
        auto hidden = tape.dropout(tape.relu(tape.dense(in, tape.param("fc.W"), tape.param("fc.b"))), 0.5,
                                   Mode::train, dropout_rng);
        auto loss = tape.softmax_xent(hidden, 1);
        tape.backward(loss, 1.0);
        Fnv64 h;
        for (const auto& [name, e] : store.entries())
            for (double gv : e.grad.data) h.update_f64(gv);
        return h.digest();
    };
    EXPECT_EQ(run(42), run(42));
    EXPECT_NE(run(42), run(43));
}
