#include "ald/eval.hpp"

#include <algorithm>

#include "ald/rng.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

using namespace ald;
using ald::oracles::brute_prf;
using ald::oracles::prf_equal;

TEST(Confusion, Basics) {
    const ConfusionMatrix diag = confusion({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
    for (int g = 0; g < 3; ++g)
        for (int p = 0; p < 3; ++p)
            if (g != p) EXPECT_EQ(diag.at(g, p), 0);
    EXPECT_EQ(diag.at(1, 1), 2);
    EXPECT_EQ(diag.total(), 4);

    const ConfusionMatrix empty = confusion({}, {}, 3);
    EXPECT_EQ(empty.total(), 0);

    const ConfusionMatrix cm = confusion({0, 0, 1, 2}, {0, 1, 1, 1}, 3);
    EXPECT_EQ(cm.at(0, 0), 1);
    EXPECT_EQ(cm.at(0, 1), 1);
    EXPECT_EQ(cm.at(0, 2), 0);
    EXPECT_EQ(cm.at(1, 1), 1);
    EXPECT_EQ(cm.at(2, 1), 1);
    EXPECT_EQ(cm.row_sum(0), 2);
    EXPECT_EQ(cm.col_sum(1), 3);

    EXPECT_THROW(confusion({0, 1}, {0}, 2), DataError);
    EXPECT_THROW(confusion({0, 3}, {0, 0}, 3), DataError);
}

TEST(Prf, PerfectPredictions) {
    const PRF p = prf(confusion({0, 1, 2, 0}, {0, 1, 2, 0}, 3));
    for (const auto& c : p.per_class) {
        EXPECT_DOUBLE_EQ(c.precision, 1.0);
        EXPECT_DOUBLE_EQ(c.recall, 1.0);
        EXPECT_DOUBLE_EQ(c.f1, 1.0);
    }
    EXPECT_DOUBLE_EQ(p.weighted_f1, 1.0);
}

// golds [0,0,1,2], preds [0,1,1,1]: class0 P=1 R=1/2 F1=2/3; class1 P=1/3
// R=1 F1=1/2; class2 all 0. Weighted F1 = (2*(2/3) + 1*(1/2) + 0)/4 = 11/24.
TEST(Prf, WorkedExample) {
    const PRF p = prf(confusion({0, 0, 1, 2}, {0, 1, 1, 1}, 3));
    EXPECT_DOUBLE_EQ(p.per_class[0].precision, 1.0);
    EXPECT_DOUBLE_EQ(p.per_class[0].recall, 0.5);
    EXPECT_NEAR(p.per_class[0].f1, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(p.per_class[1].precision, 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(p.per_class[1].recall, 1.0);
    EXPECT_DOUBLE_EQ(p.per_class[1].f1, 0.5);
    EXPECT_DOUBLE_EQ(p.per_class[2].f1, 0.0);
    EXPECT_NEAR(p.weighted_f1, 11.0 / 24.0, 1e-12);
    EXPECT_NEAR(p.weighted_f1, 0.4583, 5e-5);
}

TEST(Prf, MatchesCountingOracle) {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(2));
        const int n = static_cast<int>(rng.next_below(40));
        std::vector<int> golds, preds;
        for (int i = 0; i < n; ++i) {
            golds.push_back(static_cast<int>(rng.next_below(static_cast<std::size_t>(k))));
            preds.push_back(static_cast<int>(rng.next_below(static_cast<std::size_t>(k))));
        }
        ASSERT_TRUE(prf_equal(prf(confusion(golds, preds, k)), brute_prf(golds, preds, k)))
            << "trial " << trial;
    }
}

// Weighted F1 averages per-class F1 values, so it can fall outside the
// interval spanned by weighted precision and weighted recall. Search small
// binary confusion matrices for a witness.
TEST(Prf, WeightedF1CanLeaveThePrecisionRecallInterval) {
    bool found = false;
    ConfusionMatrix witness(2);
    for (int a = 0; a <= 4 && !found; ++a)
        for (int b = 0; b <= 4 && !found; ++b)
            for (int c = 0; c <= 4 && !found; ++c)
                for (int d = 0; d <= 4 && !found; ++d) {
                    ConfusionMatrix cm(2);
                    cm.at(0, 0) = a;
                    cm.at(0, 1) = b;
                    cm.at(1, 0) = c;
                    cm.at(1, 1) = d;
                    if (cm.total() == 0) continue;
                    const PRF p = prf(cm);
                    const double lo = std::min(p.weighted_precision, p.weighted_recall);
                    const double hi = std::max(p.weighted_precision, p.weighted_recall);
                    if (p.weighted_f1 < lo - 1e-9 || p.weighted_f1 > hi + 1e-9) {
                        found = true;
                        witness = cm;
                    }
                }
    EXPECT_TRUE(found);
    // the concrete witness stays a witness under the oracle too
    std::vector<int> golds, preds;
    for (int g = 0; g < 2; ++g)
        for (int p = 0; p < 2; ++p)
            for (long long i = 0; i < witness.at(g, p); ++i) {
                golds.push_back(g);
                preds.push_back(p);
            }
    const PRF check = brute_prf(golds, preds, 2);
    const double lo = std::min(check.weighted_precision, check.weighted_recall);
    const double hi = std::max(check.weighted_precision, check.weighted_recall);
    EXPECT_TRUE(check.weighted_f1 < lo - 1e-9 || check.weighted_f1 > hi + 1e-9);
}

TEST(Prf, PermutationInvariant) {
    Rng rng(7);
    std::vector<int> golds, preds;
    for (int i = 0; i < 50; ++i) {
        golds.push_back(static_cast<int>(rng.next_below(3)));
        preds.push_back(static_cast<int>(rng.next_below(3)));
    }
    const PRF base = prf(confusion(golds, preds, 3));
    std::vector<int> order(50);
    for (int i = 0; i < 50; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int trial = 0; trial < 20; ++trial) {
        rng.shuffle(order);
        std::vector<int> g2, p2;
        for (int i : order) {
            g2.push_back(golds[static_cast<std::size_t>(i)]);
            p2.push_back(preds[static_cast<std::size_t>(i)]);
        }
        EXPECT_TRUE(prf_equal(base, prf(confusion(g2, p2, 3))));
    }
}

TEST(Prf, SupportAccounting) {
    const ConfusionMatrix cm = confusion({0, 0, 1, 2, 2, 2}, {0, 1, 1, 0, 2, 2}, 3);
    const PRF p = prf(cm);
    double support_sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        support_sum += p.per_class[static_cast<std::size_t>(c)].support;
        EXPECT_DOUBLE_EQ(p.per_class[static_cast<std::size_t>(c)].support, static_cast<double>(cm.row_sum(c)));
    }
    EXPECT_DOUBLE_EQ(support_sum, 6.0);
    EXPECT_DOUBLE_EQ(p.total_support, 6.0);
}

TEST(AggregateFolds, MeanOfEveryNumber) {
    PRF a = prf(confusion({0, 1}, {0, 1}, 2));  // all ones
    PRF b = prf(confusion({0, 1}, {1, 0}, 2));  // all zeros
    EXPECT_TRUE(prf_equal(aggregate_folds({a}), a));
    const PRF mean = aggregate_folds({a, b});
    EXPECT_DOUBLE_EQ(mean.weighted_f1, 0.5);
    EXPECT_DOUBLE_EQ(mean.per_class[0].precision, 0.5);
    PRF c = a;
    const PRF constant = aggregate_folds({a, a, a});
    EXPECT_TRUE(prf_equal(constant, c));
    // two folds with weighted F1 0.8 and 0.6 average to 0.7
    PRF x, y;
    x.per_class.resize(2);
    y.per_class.resize(2);
    x.weighted_f1 = 0.8;
    y.weighted_f1 = 0.6;
    EXPECT_DOUBLE_EQ(aggregate_folds({x, y}).weighted_f1, 0.7);
    EXPECT_THROW(aggregate_folds({}), DataError);
}

TEST(Render, TsvShape) {
    const PRF p = prf(confusion({0, 1, 1}, {0, 1, 0}, 2));
    const std::string tsv = render_tsv({{"lr", p}}, {"none", "abusive"});
    std::istringstream ss(tsv);
    std::string header, row, extra;
    ASSERT_TRUE(static_cast<bool>(std::getline(ss, header)));
    ASSERT_TRUE(static_cast<bool>(std::getline(ss, row)));
    EXPECT_FALSE(static_cast<bool>(std::getline(ss, extra)));
    const auto count_tabs = [](const std::string& s) { return std::count(s.begin(), s.end(), '\t'); };
    EXPECT_EQ(count_tabs(header), count_tabs(row));
    EXPECT_EQ(count_tabs(header), 9);  // method + 2 classes x3 + total x3
    EXPECT_NE(header.find("abusive_f1"), std::string::npos);
    const std::string table = render_table({{"lr", p}}, {"none", "abusive"}, "Title");
    EXPECT_NE(table.find("Title"), std::string::npos);
    EXPECT_NE(table.find("lr"), std::string::npos);
}
