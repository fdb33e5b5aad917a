#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ald/autodiff.hpp"
#include "ald/classifier.hpp"
#include "ald/corpus.hpp"
#include "ald/params.hpp"
#include "ald/textprep.hpp"

namespace ald {

// Sparse count vector; indices strictly increasing, counts >= 1.
struct SparseVec {
    std::vector<std::pair<int, int>> items;
    std::size_t nnz() const { return items.size(); }
};

// Character n-gram feature space fit on training text only. Test-time
// n-grams outside the map are dropped, never added, so the map hash is a
// leakage witness.
class NgramFeatureMap {
  public:
    NgramFeatureMap() = default;

    static NgramFeatureMap fit(const CorpusView& view, const CharAlphabet& alphabet, int n_min, int n_max,
                               int min_doc_freq) {
        if (n_min < 1 || n_max < n_min) throw DataError("ngram map: bad n range");
        if (min_doc_freq < 1) throw DataError("ngram map: min_doc_freq must be >= 1");
        NgramFeatureMap map;
        map.n_min_ = n_min;
        map.n_max_ = n_max;
        std::map<std::string, long long> doc_freq;
        std::set<std::string> in_doc;
        for (std::size_t i = 0; i < view.size(); ++i) {
            in_doc.clear();
            const std::string text = quantize_text(view.example(i).text, alphabet);
            const int len = static_cast<int>(text.size());
            for (int n = n_min; n <= n_max; ++n)
                for (int s = 0; s + n <= len; ++s) in_doc.insert(text.substr(static_cast<std::size_t>(s), static_cast<std::size_t>(n)));
            for (const auto& g : in_doc) ++doc_freq[g];
        }
        for (const auto& [gram, df] : doc_freq)
            if (df >= min_doc_freq) {
                map.index_.emplace(gram, static_cast<int>(map.names_.size()));
                map.names_.push_back(gram);
            }
        return map;
    }

    int size() const { return static_cast<int>(names_.size()); }
    int n_min() const { return n_min_; }
    int n_max() const { return n_max_; }

    SparseVec transform(const std::string& raw_text, const CharAlphabet& alphabet) const {
        const std::string text = quantize_text(raw_text, alphabet);
        const int len = static_cast<int>(text.size());
        std::map<int, int> counts;
        for (int n = n_min_; n <= n_max_; ++n)
            for (int s = 0; s + n <= len; ++s) {
                auto it = index_.find(text.substr(static_cast<std::size_t>(s), static_cast<std::size_t>(n)));
                if (it != index_.end()) ++counts[it->second];
            }
        SparseVec vec;
        vec.items.assign(counts.begin(), counts.end());
        return vec;
    }

    std::uint64_t hash() const {
        Fnv64 h;
        for (const auto& name : names_) {
            h.update(name);
            h.update("\x1f");
        }
        return h.digest();
    }

  private:
    int n_min_ = 1;
    int n_max_ = 4;
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

// Multinomial logistic regression over char n-gram counts, trained with the
// same balanced-batch Adam loop as the CNNs.
class LogRegClassifier : public Classifier {
  public:
    LogRegClassifier(const NgramFeatureMap& map, const CharAlphabet& alphabet, int n_classes, double lambda,
                     std::uint64_t seed)
        : map_(&map), alphabet_(&alphabet), n_classes_(n_classes), lambda_(lambda) {
        Rng rng(derive_seed(seed, 0x10f2));
        init_uniform_glorot(store_.create("lr.W", {map.size(), n_classes}), map.size(), n_classes, rng);
        store_.create("lr.b", {n_classes});
    }

    const std::string& name() const override {
        static const std::string n = "lr";
        return n;
    }
    int num_classes() const override { return n_classes_; }
    ParamStore& params() override { return store_; }
    const ParamStore& params() const override { return store_; }
    double l2_lambda() const override { return lambda_; }

    Tape::Ref loss_node(Tape& tape, const Example& ex, Mode, Rng&) const override {
        const SparseVec features = map_->transform(ex.text, *alphabet_);
        auto logits = tape.sparse_dense(features.items, tape.param("lr.W"), tape.param("lr.b"));
        return tape.softmax_xent(logits, ex.label);
    }

    std::vector<double> scores(const Example& ex) const override {
        Tape tape(const_cast<ParamStore*>(&store_));
        const SparseVec features = map_->transform(ex.text, *alphabet_);
        return tape.value(tape.sparse_dense(features.items, tape.param("lr.W"), tape.param("lr.b"))).data;
    }

  private:
    const NgramFeatureMap* map_;
    const CharAlphabet* alphabet_;
    int n_classes_;
    double lambda_;
    ParamStore store_;
};

// One-vs-rest linear SVM on the same n-gram features: squared hinge with an
// L2-regularized weight matrix; objective per example is
// hinge_scale * sum_c max(0, 1 - y_c s_c)^2, plus lambda ||W||^2 from the
// trainer. Prediction is argmax margin.
class SvmClassifier : public Classifier {
  public:
    SvmClassifier(const NgramFeatureMap& map, const CharAlphabet& alphabet, int n_classes, double hinge_scale,
                  double lambda, std::uint64_t seed)
        : map_(&map), alphabet_(&alphabet), n_classes_(n_classes), hinge_scale_(hinge_scale), lambda_(lambda) {
        if (hinge_scale <= 0.0) throw DataError("svm: hinge scale must be positive");
        Rng rng(derive_seed(seed, 0x57e3));
        init_uniform_glorot(store_.create("svm.W", {map.size(), n_classes}), map.size(), n_classes, rng);
        store_.create("svm.b", {n_classes});
    }

    const std::string& name() const override {
        static const std::string n = "svm";
        return n;
    }
    int num_classes() const override { return n_classes_; }
    ParamStore& params() override { return store_; }
    const ParamStore& params() const override { return store_; }
    double l2_lambda() const override { return lambda_; }

    Tape::Ref loss_node(Tape& tape, const Example& ex, Mode, Rng&) const override {
        const SparseVec features = map_->transform(ex.text, *alphabet_);
        auto margins = tape.sparse_dense(features.items, tape.param("svm.W"), tape.param("svm.b"));
        auto hinge = tape.squared_hinge_ovr(margins, ex.label);
        return hinge_scale_ == 1.0 ? hinge : tape.scale(hinge, hinge_scale_);
    }

    std::vector<double> scores(const Example& ex) const override {
        Tape tape(const_cast<ParamStore*>(&store_));
        const SparseVec features = map_->transform(ex.text, *alphabet_);
        return tape.value(tape.sparse_dense(features.items, tape.param("svm.W"), tape.param("svm.b"))).data;
    }

  private:
    const NgramFeatureMap* map_;
    const CharAlphabet* alphabet_;
    int n_classes_;
    double hinge_scale_;
    double lambda_;
    ParamStore store_;
};

// Averaged bag-of-words classifier: trainable token embeddings, optional
// hashed bigram buckets, mean over the bag, one dense layer.
class FastTextClassifier : public Classifier {
  public:
    struct Options {
        int dim = 100;
        bool use_bigrams = false;
        int bigram_buckets = 1 << 18;
        double lambda = 0.0;
        bool segment_hashtags = true;
    };

    FastTextClassifier(const Vocab& vocab, const UnigramModel& unigram, int n_classes, Options options,
                       std::uint64_t seed)
        : vocab_(&vocab), unigram_(&unigram), n_classes_(n_classes), options_(options) {
        Rng rng(derive_seed(seed, 0xfa57));
        const int rows = vocab.size() + (options_.use_bigrams ? options_.bigram_buckets : 0);
        init_uniform_glorot(store_.create("ft.E", {rows, options_.dim}, true), rows, options_.dim, rng);
        init_uniform_glorot(store_.create("ft.W", {options_.dim, n_classes}), options_.dim, n_classes, rng);
        store_.create("ft.b", {n_classes});
    }

    const std::string& name() const override {
        static const std::string n = "fasttext";
        return n;
    }
    int num_classes() const override { return n_classes_; }
    ParamStore& params() override { return store_; }
    const ParamStore& params() const override { return store_; }
    double l2_lambda() const override { return options_.lambda; }

    std::vector<int> bag_ids(const Example& ex) const {
        const auto tokens = expand_tokens(tokenize(ex.text), options_.segment_hashtags, *unigram_);
        std::vector<int> ids;
        ids.reserve(tokens.size());
        for (const auto& tok : tokens) ids.push_back(vocab_->id(tok));
        if (options_.use_bigrams) {
            for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
                Fnv64 h;
                h.update(tokens[i]);
                h.update("\x1f");
                h.update(tokens[i + 1]);
                ids.push_back(vocab_->size() +
                              static_cast<int>(h.digest() % static_cast<std::uint64_t>(options_.bigram_buckets)));
            }
        }
        return ids;
    }

    Tape::Ref logits_node(Tape& tape, const Example& ex) const {
        const std::vector<int> ids = bag_ids(ex);
        Tape::Ref pooled;
        if (ids.empty()) {
            pooled = tape.input(Tensor({options_.dim}));  // empty bag: bias-only logits
        } else {
            pooled = tape.mean_rows(tape.embedding(ids, "ft.E"));
        }
        return tape.dense(pooled, tape.param("ft.W"), tape.param("ft.b"));
    }

    Tape::Ref loss_node(Tape& tape, const Example& ex, Mode, Rng&) const override {
        return tape.softmax_xent(logits_node(tape, ex), ex.label);
    }

    std::vector<double> scores(const Example& ex) const override {
        Tape tape(const_cast<ParamStore*>(&store_));
        return tape.value(logits_node(tape, ex)).data;
    }

  private:
    const Vocab* vocab_;
    const UnigramModel* unigram_;
    int n_classes_;
    Options options_;
    ParamStore store_;
};

}  // namespace ald
