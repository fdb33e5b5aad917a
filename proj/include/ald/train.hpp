#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ald/classifier.hpp"
#include "ald/corpus.hpp"
#include "ald/eval.hpp"
#include "ald/params.hpp"

namespace ald {

struct TrainConfig {
    int batch_size = 32;
    int max_epochs = 30;
    int patience = 3;          // evaluations without improvement before stopping
    double eval_fraction = 0.1;  // stratified early-stop holdout from the training view
    std::uint64_t seed = 1;
    AdamHyper adam;
    bool verbose = false;

    void validate() const {
        if (batch_size < 1) throw DataError("train config: batch_size must be >= 1");
        if (max_epochs < 1) throw DataError("train config: max_epochs must be >= 1");
        if (patience < 1) throw DataError("train config: patience must be >= 1");
        if (!(eval_fraction > 0.0 && eval_fraction < 0.5))
            throw DataError("train config: eval_fraction must be in (0, 0.5)");
        adam.validate();
    }
};

struct TrainReport {
    std::vector<double> train_loss;  // per epoch, data term only
    std::vector<double> eval_loss;
    std::vector<double> eval_f1;
    int best_epoch = 0;  // 1-based
    long long total_batches = 0;
};

// Stop when the evaluation loss has failed to improve (strictly) for
// `patience` consecutive evaluations; the best epoch's checkpoint wins.
class EarlyStopper {
  public:
    explicit EarlyStopper(int patience) : patience_(patience) {
        if (patience < 1) throw DataError("early stop: patience must be >= 1");
    }

    // Feed one evaluation loss; returns true when training should stop.
    bool observe(double eval_loss) {
        ++epoch_;
        if (eval_loss < best_loss_) {
            best_loss_ = eval_loss;
            best_epoch_ = epoch_;
            bad_streak_ = 0;
        } else {
            ++bad_streak_;
        }
        return bad_streak_ >= patience_;
    }

    bool last_improved() const { return bad_streak_ == 0 && epoch_ > 0; }
    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

  private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    int bad_streak_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
};

// Stratified holdout of roughly `fraction` of the view (at least one per
// class where the class can spare one).
inline std::pair<CorpusView, CorpusView> split_eval(const CorpusView& view, double fraction, std::uint64_t seed) {
    const int nc = num_classes(view.schema());
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(nc));
    for (std::size_t i = 0; i < view.size(); ++i)
        by_class[static_cast<std::size_t>(view.example(i).label)].push_back(view.indices[i]);
    Rng rng(derive_seed(seed, 0xe7a1));
    CorpusView train_part, eval_part;
    train_part.corpus = eval_part.corpus = view.corpus;
    for (int c = 0; c < nc; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(idx);
        const long long n = static_cast<long long>(idx.size());
        long long take = static_cast<long long>(std::floor(fraction * static_cast<double>(n)));
        if (take < 1 && n >= 2) take = 1;
        if (take > n - 1) take = n - 1;
        if (take < 0) take = 0;
        for (long long i = 0; i < n; ++i)
            (i < take ? eval_part : train_part).indices.push_back(idx[static_cast<std::size_t>(i)]);
    }
    std::sort(train_part.indices.begin(), train_part.indices.end());
    std::sort(eval_part.indices.begin(), eval_part.indices.end());
    return {train_part, eval_part};
}

// One balanced mini-batch: per-example backward accumulates (1/B)-scaled
// gradients, the L2 penalty lands once per batch, then a single Adam step.
// Returns the mean data loss over the batch.
inline double step_batch(Classifier& clf, const LabeledCorpus& corpus, const std::vector<int>& batch,
                         AdamHyper& hyper, Rng& dropout_rng) {
    if (batch.empty()) throw DataError("step_batch: empty batch");
    ParamStore& store = clf.params();
    store.zero_grads();
    double total = 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (int idx : batch) {
        Tape tape(&store);
        const auto loss = clf.loss_node(tape, corpus[static_cast<std::size_t>(idx)], Mode::train, dropout_rng);
        total += tape.scalar(loss);
        tape.backward(loss, inv);
    }
    add_l2(total * inv, store, clf.l2_lambda(), [&clf](const std::string& n) { return clf.l2_includes(n); });
    adam_step(store, hyper);
    return total * inv;
}

inline double mean_eval_loss(const Classifier& clf, const CorpusView& view) {
    if (view.size() == 0) throw DataError("mean_eval_loss: empty view");
    double total = 0.0;
    Rng unused(0);
    auto& store = const_cast<ParamStore&>(clf.params());
    for (std::size_t i = 0; i < view.size(); ++i) {
        Tape tape(&store);
        total += tape.scalar(clf.loss_node(tape, view.example(i), Mode::infer, unused));
    }
    return total / static_cast<double>(view.size());
}

inline PRF evaluate(const Classifier& clf, const CorpusView& view) {
    std::vector<int> golds, preds;
    golds.reserve(view.size());
    preds.reserve(view.size());
    for (std::size_t i = 0; i < view.size(); ++i) {
        golds.push_back(view.example(i).label);
        preds.push_back(clf.predict(view.example(i)));
    }
    return prf(confusion(golds, preds, clf.num_classes()));
}

// Balanced-batch Adam training with evaluation-loss early stopping and
// best-checkpoint restore. One epoch is ceil(N/batch) balanced batches over
// the post-holdout training subset of size N.
inline TrainReport train(Classifier& clf, const CorpusView& view, const TrainConfig& cfg) {
    cfg.validate();
    if (view.size() == 0) throw DataError("train: empty training view");
    {
        int present = 0;
        for (long long c : view.class_counts())
            if (c > 0) ++present;
        if (present < 2) throw DataError("train: need at least two classes in the training view");
    }
    auto [fit_part, eval_part] = split_eval(view, cfg.eval_fraction, cfg.seed);
    BalancedBatcher batcher(fit_part, cfg.batch_size, derive_seed(cfg.seed, 0xba7c4e5));
    Rng dropout_rng(derive_seed(cfg.seed, 0xd409));
    AdamHyper hyper = cfg.adam;
    hyper.t = 0;
    const long long bpe =
        (static_cast<long long>(fit_part.size()) + cfg.batch_size - 1) / static_cast<long long>(cfg.batch_size);

    TrainReport report;
    EarlyStopper stopper(cfg.patience);
    std::map<std::string, Tensor> best_values = clf.params().snapshot_values();
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (long long b = 0; b < bpe; ++b) {
            const double loss = step_batch(clf, *view.corpus, batcher.next(), hyper, dropout_rng);
            ++report.total_batches;
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(b + 1) + " (param norm " + std::to_string(clf.params().value_norm()) +
                                   ", grad norm " + std::to_string(clf.params().grad_norm()) + ")");
            epoch_loss += loss;
        }
        const double eval_loss = mean_eval_loss(clf, eval_part);
        if (!std::isfinite(eval_loss))
            throw NumericError("train: non-finite evaluation loss at epoch " + std::to_string(epoch) + " (param norm " +
                               std::to_string(clf.params().value_norm()) + ")");
        report.train_loss.push_back(epoch_loss / static_cast<double>(bpe));
        report.eval_loss.push_back(eval_loss);
        report.eval_f1.push_back(evaluate(clf, eval_part).weighted_f1);
        const bool stop = stopper.observe(eval_loss);
        if (stopper.last_improved()) best_values = clf.params().snapshot_values();
        if (stop) break;
    }
    clf.params().restore_values(best_values);
    report.best_epoch = stopper.best_epoch();
    return report;
}

}  // namespace ald
