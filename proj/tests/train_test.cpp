#include "ald/train.hpp"

#include <limits>

#include "ald/baselines.hpp"
#include "ald/pipeline.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace ald;

namespace {

struct Fixture {
    LabeledCorpus corpus;
    NgramFeatureMap map;

    explicit Fixture(std::vector<long long> sizes, std::uint64_t seed = 5)
        : corpus(synth_corpus(testutil::small_synth_spec(std::move(sizes)), seed)),
          map(NgramFeatureMap::fit(full_view(corpus), CharAlphabet::standard(), 1, 3, 1)) {}

    std::unique_ptr<LogRegClassifier> lr(double lambda = 1e-4, std::uint64_t seed = 3) const {
        return std::make_unique<LogRegClassifier>(map, CharAlphabet::standard(), num_classes(corpus.schema()),
                                                  lambda, seed);
    }
};

// Loss is forced non-finite regardless of parameters.
class InfLossClassifier : public Classifier {
  public:
    InfLossClassifier() { store_.create("p.W", {1}).data = {1.0}; }
    const std::string& name() const override {
        static const std::string n = "inf";
        return n;
    }
    int num_classes() const override { return 3; }
    ParamStore& params() override { return store_; }
    const ParamStore& params() const override { return store_; }
    double l2_lambda() const override { return 0.0; }
    Tape::Ref loss_node(Tape& tape, const Example&, Mode, Rng&) const override {
        return tape.input(Tensor({1}, {std::numeric_limits<double>::infinity()}));
    }
    std::vector<double> scores(const Example&) const override { return {0.0, 0.0, 0.0}; }

  private:
    ParamStore store_;
};

}  // namespace

TEST(EarlyStopper, SpecifiedSequenceStopsAtFive) {
    EarlyStopper stopper(3);
    const std::vector<double> losses = {1.0, 0.9, 0.95, 0.97, 0.99};
    std::vector<bool> stops;
    for (double l : losses) stops.push_back(stopper.observe(l));
    EXPECT_EQ(stops, (std::vector<bool>{false, false, false, false, true}));
    EXPECT_EQ(stopper.best_epoch(), 2);
    EXPECT_DOUBLE_EQ(stopper.best_loss(), 0.9);
}

TEST(EarlyStopper, NeverBeforePatiencePlusOne) {
    for (int patience = 1; patience <= 4; ++patience) {
        EarlyStopper stopper(patience);
        int epochs = 0;
        // worst case: strictly worsening losses after the first
        while (!stopper.observe(1.0 + epochs)) ++epochs;
        ++epochs;
        EXPECT_EQ(epochs, patience + 1);
    }
}

TEST(EarlyStopper, PlateauCountsAsNoImprovement) {
    EarlyStopper stopper(2);
    EXPECT_FALSE(stopper.observe(1.0));
    EXPECT_FALSE(stopper.observe(1.0));  // equal is not an improvement
    EXPECT_TRUE(stopper.observe(1.0));
    EXPECT_EQ(stopper.best_epoch(), 1);
}

TEST(Train, OneEpochRunsCeilNOver32Batches) {
    const Fixture f({40, 30, 30});
    auto lr = f.lr();
    TrainConfig tc;
    tc.max_epochs = 1;
    tc.seed = 77;
    const TrainReport report = train(*lr, full_view(f.corpus), tc);
    // 100 examples, 10% stratified holdout -> 90 training, ceil(90/32) = 3
    EXPECT_EQ(report.total_batches, 3);
    EXPECT_EQ(report.train_loss.size(), 1u);
}

TEST(Train, CheckpointReproducesBestEvalLossExactly) {
    const Fixture f({40, 30, 30});
    auto lr = f.lr();
    TrainConfig tc;
    tc.max_epochs = 6;
    tc.patience = 2;
    tc.seed = 12;
    const TrainReport report = train(*lr, full_view(f.corpus), tc);
    ASSERT_GE(report.best_epoch, 1);
    const auto [fit_part, eval_part] = split_eval(full_view(f.corpus), tc.eval_fraction, tc.seed);
    const double re_evaluated = mean_eval_loss(*lr, eval_part);
    EXPECT_EQ(re_evaluated, report.eval_loss[static_cast<std::size_t>(report.best_epoch - 1)]);
}

TEST(Train, DeterministicGivenSeed) {
    const Fixture f({40, 30, 30});
    TrainConfig tc;
    tc.max_epochs = 4;
    tc.seed = 9;
    auto a = f.lr(1e-4, 3);
    auto b = f.lr(1e-4, 3);
    const TrainReport ra = train(*a, full_view(f.corpus), tc);
    const TrainReport rb = train(*b, full_view(f.corpus), tc);
    EXPECT_EQ(ra.train_loss, rb.train_loss);
    EXPECT_EQ(ra.eval_loss, rb.eval_loss);
    EXPECT_EQ(ra.eval_f1, rb.eval_f1);
    EXPECT_EQ(ra.best_epoch, rb.best_epoch);
    EXPECT_EQ(a->params().values_hash(), b->params().values_hash());

    auto c = f.lr(1e-4, 3);
    TrainConfig tc2 = tc;
    tc2.seed = 10;
    const TrainReport rc = train(*c, full_view(f.corpus), tc2);
    EXPECT_NE(ra.eval_loss, rc.eval_loss);
}

TEST(Train, SeparableCorpusBeatsUniformByWideMargin) {
    const Fixture f({40, 30, 30});
    auto lr = f.lr();
    TrainConfig tc;
    tc.max_epochs = 12;
    tc.patience = 3;
    tc.seed = 4;
    const TrainReport report = train(*lr, full_view(f.corpus), tc);
    const double best = report.eval_loss[static_cast<std::size_t>(report.best_epoch - 1)];
    EXPECT_LT(best, std::log(3.0) / 2.0);
}

TEST(Train, RejectsDegenerateViews) {
    const Fixture f({40, 30, 30});
    auto lr = f.lr();
    TrainConfig tc;
    CorpusView empty;
    empty.corpus = &f.corpus;
    EXPECT_THROW(train(*lr, empty, tc), DataError);

    // single-class view
    CorpusView single;
    single.corpus = &f.corpus;
    for (std::size_t i = 0; i < f.corpus.size(); ++i)
        if (f.corpus[i].label == 0) single.indices.push_back(static_cast<int>(i));
    EXPECT_THROW(train(*lr, single, tc), DataError);
}

TEST(Train, NonFiniteLossAbortsWithDiagnostic) {
    const Fixture f({40, 30, 30});
    InfLossClassifier bad;
    TrainConfig tc;
    tc.max_epochs = 2;
    try {
        train(bad, full_view(f.corpus), tc);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("epoch"), std::string::npos) << what;
        EXPECT_NE(what.find("norm"), std::string::npos) << what;
    }
}

TEST(Train, EarlyStopTriggersOnPlateau) {
    const Fixture f({40, 30, 30});
    auto lr = f.lr();
    TrainConfig tc;
    tc.max_epochs = 60;
    tc.patience = 2;
    tc.seed = 4;
    tc.adam.alpha = 0.05;  // converge fast, then plateau
    const TrainReport report = train(*lr, full_view(f.corpus), tc);
    EXPECT_LT(report.eval_loss.size(), 60u);
    EXPECT_GE(static_cast<int>(report.eval_loss.size()), report.best_epoch);
}
