#include "ald/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "gtest/gtest.h"

using namespace ald;

namespace {

LabeledCorpus make_corpus(const std::vector<int>& labels) {
    LabeledCorpus corpus(Schema::three_class);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        Example ex;
        ex.id = "e" + std::to_string(i);
        ex.label = labels[i];
        ex.text = "text " + std::to_string(i);
        corpus.add(ex);
    }
    return corpus;
}

std::string write_temp(const std::string& content) {
    static int counter = 0;
    std::string path = ::testing::TempDir() + "corpus_test_" + std::to_string(counter++) + ".tsv";
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST(LoadDataset, ThreeValidRows) {
    const std::string path = write_temp("a\tnone\thello there\nb\tracism\tsecond row\nc\tsexism\tthird row\n");
    const LabeledCorpus corpus = load_dataset(path, Schema::three_class);
    ASSERT_EQ(corpus.size(), 3u);
    EXPECT_EQ(corpus[0].id, "a");
    EXPECT_EQ(corpus[0].label, 0);
    EXPECT_EQ(corpus[1].label, 1);
    EXPECT_EQ(corpus[2].label, 2);
    EXPECT_EQ(corpus[2].text, "third row");
    std::remove(path.c_str());
}

TEST(LoadDataset, UnknownLabelNamesLine) {
    const std::string path = write_temp("a\tnone\tok\nb\tabusive\tbad schema\n");
    try {
        load_dataset(path, Schema::three_class);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("abusive"), std::string::npos) << e.what();
    }
    std::remove(path.c_str());
}

TEST(LoadDataset, DuplicateIdRejected) {
    const std::string path = write_temp("a\tnone\tfirst\na\tnone\tsecond\n");
    EXPECT_THROW(load_dataset(path, Schema::three_class), DataError);
    std::remove(path.c_str());
}

TEST(LoadDataset, EmptyFileIsEmptyCorpus) {
    const std::string path = write_temp("");
    EXPECT_EQ(load_dataset(path, Schema::three_class).size(), 0u);
    std::remove(path.c_str());
}

TEST(LoadDataset, BinarySchemaLabels) {
    const std::string path = write_temp("a\tabusive\tx\nb\tnone\ty\n");
    const LabeledCorpus corpus = load_dataset(path, Schema::none_abusive);
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus[0].label, 1);
    EXPECT_EQ(corpus[1].label, 0);
    std::remove(path.c_str());
}

TEST(SegmentDatasets, SyntheticFourExamples) {
    const LabeledCorpus corpus = make_corpus({0, 0, 1, 2});
    const SegmentedDatasets seg = segment_datasets(corpus);
    EXPECT_EQ(seg.one_step.size(), 4u);
    ASSERT_EQ(seg.two_step_1.size(), 4u);
    EXPECT_EQ(seg.two_step_1.class_counts(), (std::vector<long long>{2, 2}));
    ASSERT_EQ(seg.two_step_2.size(), 2u);
    // sexism_racism order: sexism first
    EXPECT_EQ(seg.two_step_2.class_counts(), (std::vector<long long>{1, 1}));
    // input corpus untouched, ids preserved in order
    EXPECT_EQ(corpus.class_counts(), (std::vector<long long>{2, 1, 1}));
    EXPECT_EQ(seg.two_step_1[2].id, corpus[2].id);
    EXPECT_EQ(seg.two_step_2[0].id, "e2");
}

TEST(SegmentDatasets, EmptyCorpus) {
    const SegmentedDatasets seg = segment_datasets(LabeledCorpus(Schema::three_class));
    EXPECT_EQ(seg.one_step.size(), 0u);
    EXPECT_EQ(seg.two_step_1.size(), 0u);
    EXPECT_EQ(seg.two_step_2.size(), 0u);
}

TEST(SegmentDatasets, AbusiveCountInvariant) {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> labels;
        const int n = 1 + static_cast<int>(rng.next_below(200));
        for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.next_below(3)));
        const LabeledCorpus corpus = make_corpus(labels);
        const SegmentedDatasets seg = segment_datasets(corpus);
        const auto counts3 = corpus.class_counts();
        const auto counts1 = seg.two_step_1.class_counts();
        EXPECT_EQ(counts1[1], counts3[1] + counts3[2]);
        EXPECT_EQ(static_cast<long long>(seg.two_step_2.size()), counts3[1] + counts3[2]);
    }
}

TEST(StratifiedFolds, ExactDivision) {
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 10; ++i) labels.push_back(c);
    const LabeledCorpus corpus = make_corpus(labels);
    const FoldPlan plan = stratified_folds(corpus, 10, 7);
    std::vector<std::vector<int>> per_fold_class(10, std::vector<int>(3, 0));
    for (std::size_t i = 0; i < corpus.size(); ++i)
        ++per_fold_class[static_cast<std::size_t>(plan.assignment[i])][static_cast<std::size_t>(corpus[i].label)];
    for (int f = 0; f < 10; ++f)
        for (int c = 0; c < 3; ++c) EXPECT_EQ(per_fold_class[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)], 1);
}

TEST(StratifiedFolds, DeterministicForFixedSeed) {
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) labels.push_back(i % 3);
    const LabeledCorpus corpus = make_corpus(labels);
    EXPECT_EQ(stratified_folds(corpus, 7, 123).assignment, stratified_folds(corpus, 7, 123).assignment);
    EXPECT_NE(stratified_folds(corpus, 7, 123).assignment, stratified_folds(corpus, 7, 124).assignment);
}

// Full-corpus class sizes: 12,427 none + 2,059 racism + 3,864 sexism =
// 18,350. With per-class bases 1242/205/386 and remainders 7/9/4 spread by
// the rotating cursor, every fold lands on exactly 1,835 examples.
TEST(StratifiedFolds, FullCorpusFoldSizes) {
    std::vector<int> labels;
    labels.insert(labels.end(), 12427, 0);
    labels.insert(labels.end(), 2059, 1);
    labels.insert(labels.end(), 3864, 2);
    const LabeledCorpus corpus = make_corpus(labels);
    const FoldPlan plan = stratified_folds(corpus, 10, 99);
    std::vector<int> fold_sizes(10, 0);
    std::vector<std::vector<int>> per_fold_class(10, std::vector<int>(3, 0));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        ++fold_sizes[static_cast<std::size_t>(plan.assignment[i])];
        ++per_fold_class[static_cast<std::size_t>(plan.assignment[i])][static_cast<std::size_t>(corpus[i].label)];
    }
    for (int f = 0; f < 10; ++f) EXPECT_EQ(fold_sizes[static_cast<std::size_t>(f)], 1835);
    // stratification: per-class fold counts spread by at most 1
    for (int c = 0; c < 3; ++c) {
        int lo = per_fold_class[0][static_cast<std::size_t>(c)], hi = lo;
        for (int f = 1; f < 10; ++f) {
            lo = std::min(lo, per_fold_class[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)]);
            hi = std::max(hi, per_fold_class[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)]);
        }
        EXPECT_LE(hi - lo, 1);
    }
}

TEST(StratifiedFolds, SmallClassNamedInError) {
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(0);
    for (int i = 0; i < 30; ++i) labels.push_back(2);
    labels.push_back(1);  // racism has 1 < k examples
    const LabeledCorpus corpus = make_corpus(labels);
    try {
        stratified_folds(corpus, 10, 1);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("racism"), std::string::npos) << e.what();
    }
    EXPECT_THROW(stratified_folds(corpus, 1, 1), DataError);
}

TEST(BalancedBatcher, ThreeClassesBatch32) {
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) labels.push_back(i % 3);
    const LabeledCorpus corpus = make_corpus(labels);
    BalancedBatcher batcher(full_view(corpus), 32, 5);
    for (int b = 0; b < 50; ++b) {
        const auto batch = batcher.next();
        ASSERT_EQ(batch.size(), 32u);
        std::vector<int> counts(3, 0);
        for (int idx : batch) ++counts[static_cast<std::size_t>(corpus[static_cast<std::size_t>(idx)].label)];
        std::sort(counts.begin(), counts.end());
        EXPECT_EQ(counts, (std::vector<int>{10, 11, 11}));
    }
}

TEST(BalancedBatcher, TwoClassesBatch32) {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(i % 2);
    LabeledCorpus corpus(Schema::none_abusive);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        Example ex;
        ex.id = "b" + std::to_string(i);
        ex.label = labels[i];
        ex.text = "t";
        corpus.add(ex);
    }
    BalancedBatcher batcher(full_view(corpus), 32, 5);
    const auto batch = batcher.next();
    std::vector<int> counts(2, 0);
    for (int idx : batch) ++counts[static_cast<std::size_t>(corpus[static_cast<std::size_t>(idx)].label)];
    EXPECT_EQ(counts, (std::vector<int>{16, 16}));
}

// With replacement sampling, a 5-example minority class must surface all
// five members over a long stream, and every one of the 1,000 batches
// keeps per-class counts within one of each other.
TEST(BalancedBatcher, MinorityClassCoverageAndBalanceProperty) {
    std::vector<int> labels(500, 0);
    for (int i = 0; i < 300; ++i) labels.push_back(2);
    for (int i = 0; i < 5; ++i) labels.push_back(1);
    const LabeledCorpus corpus = make_corpus(labels);
    BalancedBatcher batcher(full_view(corpus), 32, 11);
    std::set<int> minority_seen;
    for (int b = 0; b < 1000; ++b) {
        std::vector<int> counts(3, 0);
        for (int idx : batcher.next()) {
            const int label = corpus[static_cast<std::size_t>(idx)].label;
            ++counts[static_cast<std::size_t>(label)];
            if (label == 1) minority_seen.insert(idx);
        }
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        ASSERT_LE(*hi - *lo, 1) << "batch " << b;
    }
    EXPECT_EQ(minority_seen.size(), 5u);
}

TEST(BalancedBatcher, AbsentClassRejected) {
    const LabeledCorpus corpus = make_corpus({0, 0, 2, 2});
    EXPECT_THROW(BalancedBatcher(full_view(corpus), 32, 1), DataError);
    EXPECT_THROW(BalancedBatcher(full_view(make_corpus({0, 1, 2})), 2, 1), DataError);
}

TEST(BalancedBatcher, DeterministicStream) {
    std::vector<int> labels;
    for (int i = 0; i < 90; ++i) labels.push_back(i % 3);
    const LabeledCorpus corpus = make_corpus(labels);
    BalancedBatcher a(full_view(corpus), 32, 9);
    BalancedBatcher b(full_view(corpus), 32, 9);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(SynthCorpus, SizesAndDeterminism) {
    SynthSpec spec;
    spec.signal = {{"apple", "pear"}, {"stone", "iron"}, {"wind", "rain"}};
    spec.sizes = {100, 50, 50};
    spec.filler = {"the", "of", "and"};
    const LabeledCorpus a = synth_corpus(spec, 3);
    EXPECT_EQ(a.size(), 200u);
    EXPECT_EQ(a.class_counts(), (std::vector<long long>{100, 50, 50}));
    const LabeledCorpus b = synth_corpus(spec, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].id, b[i].id);
        EXPECT_EQ(a[i].text, b[i].text);
    }
    const LabeledCorpus c = synth_corpus(spec, 4);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_diff |= a[i].text != c[i].text;
    EXPECT_TRUE(any_diff);
}

// At signal rate 1.0 every token is a class signal word, so a per-class
// unigram count ranks that class's words on top.
TEST(SynthCorpus, SignalWordsDominateTheirClass) {
    SynthSpec spec;
    spec.signal = {{"apple", "pear"}, {"stone", "iron"}, {"wind", "rain"}};
    spec.sizes = {40, 40, 40};
    spec.filler = {"the"};
    spec.signal_rate = 1.0;
    const LabeledCorpus corpus = synth_corpus(spec, 8);
    for (int c = 0; c < 3; ++c) {
        std::map<std::string, int> counts;
        for (const auto& ex : corpus.examples()) {
            if (ex.label != c) continue;
            std::istringstream ss(ex.text);
            std::string tok;
            while (ss >> tok) ++counts[tok];
        }
        std::string top;
        int best = -1;
        for (const auto& [tok, n] : counts)
            if (n > best) {
                best = n;
                top = tok;
            }
        const auto& lex = spec.signal[static_cast<std::size_t>(c)];
        EXPECT_NE(std::find(lex.begin(), lex.end(), top), lex.end()) << "class " << c << " top token " << top;
    }
}

TEST(SynthCorpus, BadSpecsRejected) {
    SynthSpec spec;
    spec.signal = {{"apple"}, {}, {"wind"}};
    spec.sizes = {2, 2, 2};
    spec.filler = {"the"};
    EXPECT_THROW(synth_corpus(spec, 1), DataError);
    spec.signal = {{"apple"}, {"apple"}, {"wind"}};
    EXPECT_THROW(synth_corpus(spec, 1), DataError);
}
