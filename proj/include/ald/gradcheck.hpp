#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ald/autodiff.hpp"
#include "ald/pipeline.hpp"

namespace ald {

// Reduced-size gradient verification for any of the six systems. Builds the
// system on a small fixed corpus, sums the per-example training loss plus a
// mild L2 term, and compares analytic gradients against central finite
// differences on a seeded coordinate sample. The fixture texts avoid
// repeated character windows so pooling argmaxes stay unique.
struct GradCheckOptions {
    double eps = 1e-5;
    int samples_per_tensor = 20;
    std::uint64_t seed = 7;
    bool corrupt_sign = false;  // harness sensitivity check: flips analytic grads
};

inline LabeledCorpus gradcheck_fixture_corpus(int n_classes) {
    LabeledCorpus corpus(n_classes == 3 ? Schema::three_class : Schema::none_abusive);
    const std::vector<std::string> texts = {
        "alpha bravo charlie #deltaecho 7!",
        "foxtrot golf hotel india 42?",
        "juliet kilo lima mike, november",
        "oscar papa quebec romeo sierra.",
        "tango uniform victor whiskey 9",
        "xray yankee zulu bravo; delta",
    };
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Example ex;
        ex.id = "g" + std::to_string(i);
        ex.label = static_cast<int>(i) % n_classes;
        ex.text = texts[i];
        corpus.add(ex);
    }
    return corpus;
}

inline PipelineConfig gradcheck_pipeline_config() {
    PipelineConfig cfg;
    cfg.model.l_char = 36;
    cfg.model.l_word = 8;
    cfg.model.embed_dim = 12;
    cfg.model.char_conv_width = 4;
    cfg.model.char_conv_maps = 6;
    cfg.model.char_pool = 3;
    cfg.model.fc_units = 10;
    cfg.model.word_widths = {1, 2, 3};
    cfg.model.word_maps = 5;
    cfg.model.hybrid_char_widths = {3, 4, 5};
    cfg.model.hybrid_char_maps = 5;
    cfg.model.dropout_rate = 0.5;
    cfg.model.lambda = 0.05;
    cfg.lr_lambda = 0.05;
    cfg.svm_lambda = 0.05;
    cfg.fasttext.dim = 8;
    cfg.fasttext.lambda = 0.05;
    cfg.vocab_min_freq = 1;
    cfg.ngram_min_df = 1;
    return cfg;
}

// Deterministic random embedding table for a vocab, without touching disk.
inline EmbeddingTable random_embeddings(const Vocab& vocab, int dim, std::uint64_t seed) {
    EmbeddingTable table;
    table.dim = dim;
    table.trainable = false;
    table.rows = Tensor({vocab.size(), dim});
    for (int v = Vocab::unk_id + 1; v < vocab.size(); ++v) {
        Fnv64 h;
        h.update(vocab.token(v));
        Rng rng(derive_seed(seed, h.digest()));
        for (int d = 0; d < dim; ++d) table.rows.at(v, d) = rng.next_uniform(-0.5, 0.5);
    }
    return table;
}

inline GradCheckReport gradcheck_system(SystemKind kind, const GradCheckOptions& options = {}) {
    const int n_classes = 3;
    const LabeledCorpus corpus = gradcheck_fixture_corpus(n_classes);
    const CorpusView view = full_view(corpus);
    PipelineConfig cfg = gradcheck_pipeline_config();
    FoldArtifacts art;
    const ArtifactNeeds needs = needs_for(kind);
    if (needs.vocab) {
        art.unigram = UnigramModel::from_view(view);
        art.vocab = build_vocab(view, cfg.vocab_min_freq, cfg.segment_hashtags, art.unigram);
        art.has_vocab = true;
        if (needs.embeddings) {
            art.embeddings = random_embeddings(art.vocab, cfg.model.embed_dim, options.seed);
            art.has_embeddings = true;
        }
    }
    if (needs.ngrams) {
        art.ngrams = NgramFeatureMap::fit(view, *art.alphabet, cfg.ngram_n_min, cfg.ngram_n_max, cfg.ngram_min_df);
        art.has_ngrams = true;
    }
    auto system = build_system(kind, n_classes, art, cfg, derive_seed(options.seed, 0x6c));

    const double lambda = system->l2_lambda();
    auto loss_fn = [&](bool want_grad) {
        Rng dropout_rng(derive_seed(options.seed, 0xd0));  // same mask sequence every call
        double total = 0.0;
        for (std::size_t i = 0; i < view.size(); ++i) {
            Tape tape(&system->params());
            const auto loss = system->loss_node(tape, view.example(i), Mode::train, dropout_rng);
            total += tape.scalar(loss);
            if (want_grad) tape.backward(loss, 1.0);
        }
        if (want_grad)
            return add_l2(total, system->params(), lambda,
                          [&](const std::string& n) { return system->l2_includes(n); });
        return total + l2_penalty(system->params(), lambda,
                                  [&](const std::string& n) { return system->l2_includes(n); });
    };
    return grad_check(loss_fn, system->params(), options.eps, options.samples_per_tensor, options.seed,
                      options.corrupt_sign);
}

}  // namespace ald
