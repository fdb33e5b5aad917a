#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ald/autodiff.hpp"
#include "ald/classifier.hpp"
#include "ald/corpus.hpp"
#include "ald/params.hpp"
#include "ald/textprep.hpp"

namespace ald {

inline int conv_out_len(int l, int width) { return l - width + 1; }
inline int pool_out_len(int l, int width, int stride) { return (l - width) / stride + 1; }

// Architecture hyperparameters for the three CNNs. full_size() presets carry
// the full-size configuration; tests and desk-scale experiments shrink them.
struct ModelConfig {
    enum class Kind { char_cnn, word_cnn, hybrid_cnn };

    Kind kind = Kind::hybrid_cnn;
    int n_classes = 3;
    int l_char = 140;
    int l_word = 35;
    int embed_dim = 300;

    // CharCNN: two conv+pool stages, one fully-connected layer.
    int char_conv_width = 4;
    int char_conv_maps = 1024;
    int char_pool = 3;
    int fc_units = 2048;

    // Word channel (WordCNN and HybridCNN) and the hybrid char channel:
    // parallel filter widths with 1-max pooling.
    std::vector<int> word_widths = {1, 2, 3};
    int word_maps = 50;
    std::vector<int> hybrid_char_widths = {3, 4, 5};
    int hybrid_char_maps = 50;

    double dropout_rate = 0.5;
    double lambda = 1.0;
    bool segment_hashtags = true;

    static ModelConfig char_cnn_full(int n_classes) {
        ModelConfig c;
        c.kind = Kind::char_cnn;
        c.n_classes = n_classes;
        return c;
    }
    static ModelConfig word_cnn_full(int n_classes) {
        ModelConfig c;
        c.kind = Kind::word_cnn;
        c.n_classes = n_classes;
        return c;
    }
    static ModelConfig hybrid_cnn_full(int n_classes) {
        ModelConfig c;
        c.kind = Kind::hybrid_cnn;
        c.n_classes = n_classes;
        return c;
    }

    void validate() const {
        if (n_classes < 2 || n_classes > 3) throw DataError("model config: n_classes must be 2 or 3");
        if (l_char < 1 || l_word < 1) throw DataError("model config: input lengths must be >= 1");
        if (kind == Kind::char_cnn) {
            if (char_conv_width < 1 || char_conv_maps < 1 || char_pool < 1 || fc_units < 1)
                throw DataError("model config: bad CharCNN sizes");
            int l = conv_out_len(l_char, char_conv_width);
            if (l < char_pool) throw DataError("model config: L_char too short for the first conv+pool stage");
            l = pool_out_len(l, char_pool, char_pool);
            l = conv_out_len(l, char_conv_width);
            if (l < char_pool) throw DataError("model config: L_char too short for the second conv+pool stage");
        }
        const auto check_widths = [](const std::vector<int>& ws, int maps, int limit, const char* what) {
            if (ws.empty() || maps < 1) throw DataError(std::string("model config: bad ") + what + " channel");
            for (int w : ws)
                if (w < 1 || w > limit)
                    throw DataError(std::string("model config: ") + what + " filter width exceeds input length");
        };
        if (kind == Kind::word_cnn || kind == Kind::hybrid_cnn) check_widths(word_widths, word_maps, l_word, "word");
        if (kind == Kind::hybrid_cnn) check_widths(hybrid_char_widths, hybrid_char_maps, l_char, "char");
    }
};

// One-hot view of a CharGrid: (L, 70) with all-zero rows for padding.
inline Tensor one_hot_grid(const CharGrid& grid, int alphabet_size) {
    Tensor t({grid.length(), alphabet_size});
    for (int i = 0; i < grid.length(); ++i) {
        const int idx = grid.indices[static_cast<std::size_t>(i)];
        if (idx >= 0) t.at(i, idx) = 1.0;
    }
    return t;
}

namespace detail {

// Parallel conv -> relu -> 1-max blocks over one input, concatenated.
inline Tape::Ref conv_pool_block(Tape& tape, Tape::Ref input, const std::string& prefix,
                                 const std::vector<int>& widths) {
    std::vector<Tape::Ref> pooled;
    pooled.reserve(widths.size());
    for (int w : widths) {
        const std::string base = prefix + std::to_string(w);
        auto conv = tape.conv1d(input, tape.param(base + ".W"), tape.param(base + ".b"));
        pooled.push_back(tape.global_maxpool(tape.relu(conv)));
    }
    return pooled.size() == 1 ? pooled[0] : tape.concat(pooled);
}

}  // namespace detail

// Shallow character-level CNN: one-hot 70-symbol grid, two conv+pool
// stages, one fully-connected layer, softmax with dropout.
class CharCnn : public Classifier {
  public:
    CharCnn(ModelConfig config, const CharAlphabet& alphabet, std::uint64_t seed)
        : config_(std::move(config)), alphabet_(&alphabet) {
        if (config_.kind != ModelConfig::Kind::char_cnn) throw DataError("CharCnn: config kind mismatch");
        config_.validate();
        const int A = alphabet.size();
        const int M = config_.char_conv_maps;
        const int W = config_.char_conv_width;
        Rng rng(derive_seed(seed, 0xc4a2));
        auto glorot = [&](Tensor& t, int fan_in, int fan_out) { init_uniform_glorot(t, fan_in, fan_out, rng); };
        glorot(store_.create("conv1.W", {W, A, M}), W * A, W * M);
        store_.create("conv1.b", {M});
        glorot(store_.create("conv2.W", {W, M, M}), W * M, W * M);
        store_.create("conv2.b", {M});
        int l = pool_out_len(conv_out_len(config_.l_char, W), config_.char_pool, config_.char_pool);
        l = pool_out_len(conv_out_len(l, W), config_.char_pool, config_.char_pool);
        flat_len_ = l * M;
        glorot(store_.create("fc.W", {flat_len_, config_.fc_units}), flat_len_, config_.fc_units);
        store_.create("fc.b", {config_.fc_units});
        glorot(store_.create("out.W", {config_.fc_units, config_.n_classes}), config_.fc_units, config_.n_classes);
        store_.create("out.b", {config_.n_classes});
    }

    const std::string& name() const override {
        static const std::string n = "charcnn";
        return n;
    }
    int num_classes() const override { return config_.n_classes; }
    ParamStore& params() override { return store_; }
    const ParamStore& params() const override { return store_; }
    double l2_lambda() const override { return config_.lambda; }
    const ModelConfig& config() const { return config_; }

    Tape::Ref logits_node(Tape& tape, const Example& ex, Mode mode, Rng& rng) const {
        const CharGrid grid = quantize_chars(ex.text, *alphabet_, config_.l_char);
        auto x = tape.input(one_hot_grid(grid, alphabet_->size()));
        x = tape.conv1d(x, tape.param("conv1.W"), tape.param("conv1.b"));
        x = tape.maxpool1d(tape.relu(x), config_.char_pool, config_.char_pool);
        x = tape.conv1d(x, tape.param("conv2.W"), tape.param("conv2.b"));
        x = tape.maxpool1d(tape.relu(x), config_.char_pool, config_.char_pool);
        x = tape.flatten(x);
        x = tape.relu(tape.dense(x, tape.param("fc.W"), tape.param("fc.b")));
        x = tape.dropout(x, config_.dropout_rate, mode, rng);
        return tape.dense(x, tape.param("out.W"), tape.param("out.b"));
    }

    Tape::Ref loss_node(Tape& tape, const Example& ex, Mode mode, Rng& rng) const override {
        return tape.softmax_xent(logits_node(tape, ex, mode, rng), ex.label);
    }

    std::vector<double> scores(const Example& ex) const override {
        Tape tape(const_cast<ParamStore*>(&store_));
        Rng rng(0);
        return tape.value(logits_node(tape, ex, Mode::infer, rng)).data;
    }

  private:
    ModelConfig config_;
    const CharAlphabet* alphabet_;
    ParamStore store_;
    int flat_len_ = 0;
};

// Kim-style CNN-static: frozen pretrained embeddings, parallel filter
// widths with 1-max pooling, dropout, softmax.
class WordCnn : public Classifier {
  public:
    WordCnn(ModelConfig config, const Vocab& vocab, const EmbeddingTable& embeddings, const UnigramModel& unigram,
            std::uint64_t seed)
        : config_(std::move(config)), vocab_(&vocab), unigram_(&unigram) {
        if (config_.kind != ModelConfig::Kind::word_cnn) throw DataError("WordCnn: config kind mismatch");
        config_.validate();
        if (embeddings.dim != config_.embed_dim)
            throw DataError("WordCnn: embedding dimension does not match config");
        Rng rng(derive_seed(seed, 0x30dc));
        Tensor& table = store_.create("embed.E", embeddings.rows.shape, embeddings.trainable);
        table = embeddings.rows;
        const int D = config_.embed_dim;
        for (int w : config_.word_widths) {
            const std::string base = "wconv" + std::to_string(w);
            init_uniform_glorot(store_.create(base + ".W", {w, D, config_.word_maps}), w * D, w * config_.word_maps,
                                rng);
            store_.create(base + ".b", {config_.word_maps});
        }
        const int feat = static_cast<int>(config_.word_widths.size()) * config_.word_maps;
        init_uniform_glorot(store_.create("out.W", {feat, config_.n_classes}), feat, config_.n_classes, rng);
        store_.create("out.b", {config_.n_classes});
    }

    const std::string& name() const override {
        static const std::string n = "wordcnn";
        return n;
    }
    int num_classes() const override { return config_.n_classes; }
    ParamStore& params() override { return store_; }
    const ParamStore& params() const override { return store_; }
    double l2_lambda() const override { return config_.lambda; }
    const ModelConfig& config() const { return config_; }

    WordIds encode(const Example& ex) const {
        return encode_words(tokenize(ex.text), *vocab_, config_.l_word, config_.segment_hashtags, *unigram_);
    }

    Tape::Ref logits_node(Tape& tape, const Example& ex, Mode mode, Rng& rng) const {
        auto embedded = tape.embedding(encode(ex), "embed.E");
        auto features = detail::conv_pool_block(tape, embedded, "wconv", config_.word_widths);
        auto dropped = tape.dropout(features, config_.dropout_rate, mode, rng);
        return tape.dense(dropped, tape.param("out.W"), tape.param("out.b"));
    }

    Tape::Ref loss_node(Tape& tape, const Example& ex, Mode mode, Rng& rng) const override {
        return tape.softmax_xent(logits_node(tape, ex, mode, rng), ex.label);
    }

    std::vector<double> scores(const Example& ex) const override {
        Tape tape(const_cast<ParamStore*>(&store_));
        Rng rng(0);
        return tape.value(logits_node(tape, ex, Mode::infer, rng)).data;
    }

  private:
    ModelConfig config_;
    const Vocab* vocab_;
    const UnigramModel* unigram_;
    ParamStore store_;
};

// Two-channel model: char channel (one-hot grid, widths [3,4,5]) and word
// channel (widths [1,2,3]) are 1-max pooled, concatenated, and classified
// through a single softmax after one dropout.
class HybridCnn : public Classifier {
  public:
    HybridCnn(ModelConfig config, const CharAlphabet& alphabet, const Vocab& vocab, const EmbeddingTable& embeddings,
              const UnigramModel& unigram, std::uint64_t seed)
        : config_(std::move(config)), alphabet_(&alphabet), vocab_(&vocab), unigram_(&unigram) {
        if (config_.kind != ModelConfig::Kind::hybrid_cnn) throw DataError("HybridCnn: config kind mismatch");
        config_.validate();
        if (embeddings.dim != config_.embed_dim)
            throw DataError("HybridCnn: embedding dimension does not match config");
        Rng rng(derive_seed(seed, 0x4b1d));
        Tensor& table = store_.create("embed.E", embeddings.rows.shape, embeddings.trainable);
        table = embeddings.rows;
        const int A = alphabet.size();
        for (int w : config_.hybrid_char_widths) {
            const std::string base = "cconv" + std::to_string(w);
            init_uniform_glorot(store_.create(base + ".W", {w, A, config_.hybrid_char_maps}), w * A,
                                w * config_.hybrid_char_maps, rng);
            store_.create(base + ".b", {config_.hybrid_char_maps});
        }
        for (int w : config_.word_widths) {
            const std::string base = "wconv" + std::to_string(w);
            init_uniform_glorot(store_.create(base + ".W", {w, config_.embed_dim, config_.word_maps}),
                                w * config_.embed_dim, w * config_.word_maps, rng);
            store_.create(base + ".b", {config_.word_maps});
        }
        const int feat = static_cast<int>(config_.hybrid_char_widths.size()) * config_.hybrid_char_maps +
                         static_cast<int>(config_.word_widths.size()) * config_.word_maps;
        init_uniform_glorot(store_.create("out.W", {feat, config_.n_classes}), feat, config_.n_classes, rng);
        store_.create("out.b", {config_.n_classes});
    }

    const std::string& name() const override {
        static const std::string n = "hybridcnn";
        return n;
    }
    int num_classes() const override { return config_.n_classes; }
    ParamStore& params() override { return store_; }
    const ParamStore& params() const override { return store_; }
    double l2_lambda() const override { return config_.lambda; }
    const ModelConfig& config() const { return config_; }

    Tape::Ref logits_node(Tape& tape, const Example& ex, Mode mode, Rng& rng) const {
        const CharGrid grid = quantize_chars(ex.text, *alphabet_, config_.l_char);
        auto char_in = tape.input(one_hot_grid(grid, alphabet_->size()));
        auto char_feat = detail::conv_pool_block(tape, char_in, "cconv", config_.hybrid_char_widths);
        auto word_in = tape.embedding(
            encode_words(tokenize(ex.text), *vocab_, config_.l_word, config_.segment_hashtags, *unigram_), "embed.E");
        auto word_feat = detail::conv_pool_block(tape, word_in, "wconv", config_.word_widths);
        auto merged = tape.concat({char_feat, word_feat});
        auto dropped = tape.dropout(merged, config_.dropout_rate, mode, rng);
        return tape.dense(dropped, tape.param("out.W"), tape.param("out.b"));
    }

    Tape::Ref loss_node(Tape& tape, const Example& ex, Mode mode, Rng& rng) const override {
        return tape.softmax_xent(logits_node(tape, ex, mode, rng), ex.label);
    }

    std::vector<double> scores(const Example& ex) const override {
        Tape tape(const_cast<ParamStore*>(&store_));
        Rng rng(0);
        return tape.value(logits_node(tape, ex, Mode::infer, rng)).data;
    }

  private:
    ModelConfig config_;
    const CharAlphabet* alphabet_;
    const Vocab* vocab_;
    const UnigramModel* unigram_;
    ParamStore store_;
};

}  // namespace ald
