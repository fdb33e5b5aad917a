#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ald/baselines.hpp"
#include "ald/corpus.hpp"
#include "ald/eval.hpp"
#include "ald/models.hpp"
#include "ald/textprep.hpp"
#include "ald/train.hpp"

namespace ald {

enum class SystemKind { lr, svm, fasttext, char_cnn, word_cnn, hybrid_cnn };

inline const std::string& system_name(SystemKind k) {
    static const std::vector<std::string> names = {"lr", "svm", "fasttext", "charcnn", "wordcnn", "hybridcnn"};
    return names[static_cast<std::size_t>(k)];
}

inline SystemKind parse_system_kind(const std::string& name) {
    for (int i = 0; i < 6; ++i)
        if (system_name(static_cast<SystemKind>(i)) == name) return static_cast<SystemKind>(i);
    throw UsageError("unknown system '" + name + "' (expected lr|svm|fasttext|charcnn|wordcnn|hybridcnn)");
}

// Everything the experiment driver needs to build and train any system.
struct PipelineConfig {
    ModelConfig model;  // CNN sizes; kind/n_classes are set per run
    TrainConfig train;
    double lr_lambda = 1e-4;
    double svm_hinge_scale = 1.0;
    double svm_lambda = 1e-4;
    FastTextClassifier::Options fasttext;
    int vocab_min_freq = 1;
    int ngram_n_min = 1;
    int ngram_n_max = 4;
    int ngram_min_df = 2;
    bool segment_hashtags = true;
    std::string embeddings_path;
    std::string unigram_counts_path;  // optional extra counts for segmentation
};

// Per-fold preprocessing state, fit on training folds only. The hashes are
// the leakage-audit fingerprints.
struct FoldArtifacts {
    const CharAlphabet* alphabet = &CharAlphabet::standard();
    UnigramModel unigram;
    Vocab vocab;
    EmbeddingTable embeddings;
    NgramFeatureMap ngrams;
    bool has_vocab = false;
    bool has_embeddings = false;
    bool has_ngrams = false;
};

struct ArtifactNeeds {
    bool vocab = false;
    bool embeddings = false;
    bool ngrams = false;
};

inline ArtifactNeeds needs_for(SystemKind kind) {
    switch (kind) {
        case SystemKind::lr:
        case SystemKind::svm: {
            ArtifactNeeds n;
            n.ngrams = true;
            return n;
        }
        case SystemKind::fasttext: {
            ArtifactNeeds n;
            n.vocab = true;
            return n;
        }
        case SystemKind::char_cnn:
            return {};
        default: {  // word/hybrid
            ArtifactNeeds n;
            n.vocab = true;
            n.embeddings = true;
            return n;
        }
    }
}

inline FoldArtifacts fit_artifacts(const CorpusView& train_part, const PipelineConfig& cfg, ArtifactNeeds needs) {
    FoldArtifacts art;
    if (needs.vocab) {
        art.unigram = UnigramModel::from_view(train_part);
        if (!cfg.unigram_counts_path.empty()) art.unigram.load_counts(cfg.unigram_counts_path);
        art.vocab = build_vocab(train_part, cfg.vocab_min_freq, cfg.segment_hashtags, art.unigram);
        art.has_vocab = true;
        if (needs.embeddings) {
            if (cfg.embeddings_path.empty())
                throw UsageError("this system needs an embeddings file (set embeddings=...)");
            art.embeddings = load_embeddings(cfg.embeddings_path, art.vocab, cfg.model.embed_dim);
            art.has_embeddings = true;
        }
    }
    if (needs.ngrams) {
        art.ngrams = NgramFeatureMap::fit(train_part, *art.alphabet, cfg.ngram_n_min, cfg.ngram_n_max,
                                          cfg.ngram_min_df);
        art.has_ngrams = true;
    }
    return art;
}

inline std::unique_ptr<Classifier> build_system(SystemKind kind, int n_classes, const FoldArtifacts& art,
                                                const PipelineConfig& cfg, std::uint64_t seed) {
    switch (kind) {
        case SystemKind::lr:
            return std::make_unique<LogRegClassifier>(art.ngrams, *art.alphabet, n_classes, cfg.lr_lambda, seed);
        case SystemKind::svm:
            return std::make_unique<SvmClassifier>(art.ngrams, *art.alphabet, n_classes, cfg.svm_hinge_scale,
                                                   cfg.svm_lambda, seed);
        case SystemKind::fasttext: {
            auto opts = cfg.fasttext;
            opts.segment_hashtags = cfg.segment_hashtags;
            return std::make_unique<FastTextClassifier>(art.vocab, art.unigram, n_classes, opts, seed);
        }
        case SystemKind::char_cnn: {
            ModelConfig mc = cfg.model;
            mc.kind = ModelConfig::Kind::char_cnn;
            mc.n_classes = n_classes;
            mc.segment_hashtags = cfg.segment_hashtags;
            return std::make_unique<CharCnn>(mc, *art.alphabet, seed);
        }
        case SystemKind::word_cnn: {
            ModelConfig mc = cfg.model;
            mc.kind = ModelConfig::Kind::word_cnn;
            mc.n_classes = n_classes;
            mc.segment_hashtags = cfg.segment_hashtags;
            return std::make_unique<WordCnn>(mc, art.vocab, art.embeddings, art.unigram, seed);
        }
        default: {
            ModelConfig mc = cfg.model;
            mc.kind = ModelConfig::Kind::hybrid_cnn;
            mc.n_classes = n_classes;
            mc.segment_hashtags = cfg.segment_hashtags;
            return std::make_unique<HybridCnn>(mc, *art.alphabet, art.vocab, art.embeddings, art.unigram, seed);
        }
    }
}

// Tests inject oracle/majority stand-ins through this hook.
using SystemFactory = std::function<std::unique_ptr<Classifier>(SystemKind, int, const FoldArtifacts&,
                                                                const PipelineConfig&, std::uint64_t)>;

inline SystemFactory default_factory() {
    return [](SystemKind kind, int n_classes, const FoldArtifacts& art, const PipelineConfig& cfg,
              std::uint64_t seed) { return build_system(kind, n_classes, art, cfg, seed); };
}

struct PipelineSpec {
    enum class Mode { one_step, two_step };
    Mode mode = Mode::one_step;
    SystemKind step1 = SystemKind::hybrid_cnn;  // the classifier for one-step runs
    SystemKind step2 = SystemKind::lr;          // two-step only
    int folds = 10;
    std::uint64_t seed = 1;
    double threshold = 0.5;
};

struct ExperimentResult {
    PRF total;                    // 3-class scores (composed, for two-step)
    std::vector<PRF> fold_totals;
    std::optional<PRF> step1_total;  // abusive-vs-none task
    std::vector<PRF> step1_folds;
    std::optional<PRF> step2_total;  // sexism-vs-racism task on gold-abusive examples
    std::vector<PRF> step2_folds;
    FoldPlan plan;
};

// Routing rule of the two-step pipeline: below the abusive threshold the
// example is none; otherwise the step-2 argmax picks sexism or racism.
inline int compose_two_step(double p_abusive, const std::vector<double>& step2_scores, double threshold = 0.5) {
    if (!(p_abusive >= 0.0 && p_abusive <= 1.0)) throw DataError("compose_two_step: probability outside [0,1]");
    if (step2_scores.size() != 2) throw DataError("compose_two_step: step-2 must be binary");
    if (p_abusive < threshold) return label_index(Schema::three_class, "none");
    const bool racism = step2_scores[1] > step2_scores[0];  // index order of Schema::sexism_racism
    return label_index(Schema::three_class, racism ? "racism" : "sexism");
}

// 10-fold protocol for the one-step multi-class task: per fold, fit
// preprocessing on the nine training folds, train with an internal
// early-stop split, score the held-out fold, then average over folds.
inline ExperimentResult run_one_step(const PipelineSpec& spec, const LabeledCorpus& corpus, const PipelineConfig& cfg,
                                     const SystemFactory& factory = default_factory()) {
    if (corpus.schema() != Schema::three_class) throw DataError("run_one_step: corpus must be 3-class");
    ExperimentResult result;
    result.plan = stratified_folds(corpus, spec.folds, spec.seed);
    const ArtifactNeeds needs = needs_for(spec.step1);
    for (int f = 0; f < spec.folds; ++f) {
        const CorpusView fit_view = train_view(corpus, result.plan, f);
        const CorpusView held_out = test_view(corpus, result.plan, f);
        const FoldArtifacts art = fit_artifacts(fit_view, cfg, needs);
        auto system = factory(spec.step1, num_classes(corpus.schema()), art, cfg, derive_seed(spec.seed, 0x100 + static_cast<std::uint64_t>(f)));
        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(spec.seed, 0x200 + static_cast<std::uint64_t>(f));
        train(*system, fit_view, tc);
        result.fold_totals.push_back(evaluate(*system, held_out));
    }
    result.total = aggregate_folds(result.fold_totals);
    return result;
}

// Two-step protocol on the identical fold plan: step 1 learns abusive vs
// none on the relabeled training folds, step 2 learns sexism vs racism on
// the abusive subset of the same training folds. Composed predictions route
// through the step-1 probability (true composition on predicted-abusive);
// step 2 is additionally scored on the gold-abusive test examples.
inline ExperimentResult run_two_step(const PipelineSpec& spec, const LabeledCorpus& corpus, const PipelineConfig& cfg,
                                     const SystemFactory& factory = default_factory()) {
    if (corpus.schema() != Schema::three_class) throw DataError("run_two_step: corpus must be 3-class");
    const int none3 = label_index(Schema::three_class, "none");
    const int racism3 = label_index(Schema::three_class, "racism");
    const int racism2 = label_index(Schema::sexism_racism, "racism");
    const int sexism2 = label_index(Schema::sexism_racism, "sexism");

    ExperimentResult result;
    result.plan = stratified_folds(corpus, spec.folds, spec.seed);
    const SegmentedDatasets seg = segment_datasets(corpus);
    const ArtifactNeeds needs1 = needs_for(spec.step1);
    const ArtifactNeeds needs2 = needs_for(spec.step2);
    for (int f = 0; f < spec.folds; ++f) {
        // Step 1: abusive-vs-none on the aligned two_step_1 corpus.
        const CorpusView fit1 = train_view(seg.two_step_1, result.plan, f);
        const FoldArtifacts art1 = fit_artifacts(fit1, cfg, needs1);
        auto step1 = factory(spec.step1, 2, art1, cfg, derive_seed(spec.seed, 0x300 + static_cast<std::uint64_t>(f)));
        TrainConfig tc1 = cfg.train;
        tc1.seed = derive_seed(spec.seed, 0x400 + static_cast<std::uint64_t>(f));
        train(*step1, fit1, tc1);

        // Step 2: sexism-vs-racism on the abusive part of the training folds.
        const CorpusView fit3 = train_view(corpus, result.plan, f);
        const LabeledCorpus step2_train = subset_corpus(fit3, Schema::sexism_racism, [&](int lab) {
            if (lab == none3) return -1;
            return lab == racism3 ? racism2 : sexism2;
        });
        if (step2_train.empty()) throw DataError("run_two_step: no abusive examples in the training folds");
        const CorpusView fit2 = full_view(step2_train);
        const FoldArtifacts art2 = fit_artifacts(fit2, cfg, needs2);
        auto step2 = factory(spec.step2, 2, art2, cfg, derive_seed(spec.seed, 0x500 + static_cast<std::uint64_t>(f)));
        TrainConfig tc2 = cfg.train;
        tc2.seed = derive_seed(spec.seed, 0x600 + static_cast<std::uint64_t>(f));
        train(*step2, fit2, tc2);

        // Composed 3-class predictions over the held-out fold.
        const CorpusView held_out = test_view(corpus, result.plan, f);
        std::vector<int> golds3, preds3;
        for (std::size_t i = 0; i < held_out.size(); ++i) {
            const Example& ex = held_out.example(i);
            golds3.push_back(ex.label);
            const double p_abusive = step1->probabilities(ex)[1];
            preds3.push_back(compose_two_step(p_abusive, step2->scores(ex), spec.threshold));
        }
        result.fold_totals.push_back(prf(confusion(golds3, preds3, 3)));

        // Step-wise scores on their own tasks.
        const CorpusView held1 = test_view(seg.two_step_1, result.plan, f);
        result.step1_folds.push_back(evaluate(*step1, held1));
        std::vector<int> golds2, preds2;
        for (std::size_t i = 0; i < held_out.size(); ++i) {
            const Example& ex = held_out.example(i);
            if (ex.label == none3) continue;
            golds2.push_back(ex.label == racism3 ? racism2 : sexism2);
            preds2.push_back(step2->predict(ex));
        }
        result.step2_folds.push_back(prf(confusion(golds2, preds2, 2)));
    }
    result.total = aggregate_folds(result.fold_totals);
    result.step1_total = aggregate_folds(result.step1_folds);
    result.step2_total = aggregate_folds(result.step2_folds);
    return result;
}

}  // namespace ald
