#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "ald/error.hpp"
#include "ald/rng.hpp"

namespace ald {

// Label schemas. The 3-class corpus is the canonical input; the two binary
// schemas are derived from it by segment_datasets().
enum class Schema {
    three_class,    // none / racism / sexism
    none_abusive,   // none / abusive       (step 1)
    sexism_racism,  // sexism / racism      (step 2)
};

inline int num_classes(Schema s) { return s == Schema::three_class ? 3 : 2; }

inline const std::vector<std::string>& class_names(Schema s) {
    static const std::vector<std::string> three = {"none", "racism", "sexism"};
    static const std::vector<std::string> step1 = {"none", "abusive"};
    static const std::vector<std::string> step2 = {"sexism", "racism"};
    switch (s) {
        case Schema::three_class: return three;
        case Schema::none_abusive: return step1;
        default: return step2;
    }
}

// -1 when the string is not a label of the schema.
inline int label_index(Schema s, const std::string& name) {
    const auto& names = class_names(s);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

struct Example {
    std::string id;
    int label = 0;
    std::string text;
};

class LabeledCorpus {
  public:
    explicit LabeledCorpus(Schema schema = Schema::three_class) : schema_(schema) {}

    Schema schema() const { return schema_; }
    std::size_t size() const { return examples_.size(); }
    bool empty() const { return examples_.empty(); }
    const Example& operator[](std::size_t i) const { return examples_[i]; }
    const std::vector<Example>& examples() const { return examples_; }

    void add(Example ex) {
        if (ex.label < 0 || ex.label >= num_classes(schema_))
            throw DataError("corpus: label index out of range for schema");
        examples_.push_back(std::move(ex));
    }

    std::vector<long long> class_counts() const {
        std::vector<long long> counts(static_cast<std::size_t>(num_classes(schema_)), 0);
        for (const auto& ex : examples_) ++counts[static_cast<std::size_t>(ex.label)];
        return counts;
    }

  private:
    Schema schema_;
    std::vector<Example> examples_;
};

// TSV rows: id <TAB> label <TAB> text. UTF-8, no header. Empty file is an
// empty corpus; a bad label or duplicate id is an error naming the line.
inline LabeledCorpus load_dataset(const std::string& path, Schema schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);
    LabeledCorpus corpus(schema);
    std::unordered_set<std::string> seen_ids;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected id<TAB>label<TAB>text");
        Example ex;
        ex.id = line.substr(0, tab1);
        std::string label = line.substr(tab1 + 1, tab2 - tab1 - 1);
        ex.text = line.substr(tab2 + 1);
        ex.label = label_index(schema, label);
        if (ex.label < 0)
            throw DataError(path + ":" + std::to_string(line_no) + ": unknown label '" + label + "'");
        if (!seen_ids.insert(ex.id).second)
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate id '" + ex.id + "'");
        corpus.add(std::move(ex));
    }
    return corpus;
}

struct SegmentedDatasets {
    LabeledCorpus one_step;    // unchanged 3-class corpus
    LabeledCorpus two_step_1;  // same examples, racism/sexism -> abusive
    LabeledCorpus two_step_2;  // abusive examples only, sexism/racism labels
};

// one_step and two_step_1 are position-aligned with the input, so a fold
// plan computed on the 3-class corpus applies to both.
inline SegmentedDatasets segment_datasets(const LabeledCorpus& corpus) {
    if (corpus.schema() != Schema::three_class)
        throw DataError("segment_datasets: input must use the 3-class schema");
    SegmentedDatasets out{LabeledCorpus(Schema::three_class), LabeledCorpus(Schema::none_abusive),
                          LabeledCorpus(Schema::sexism_racism)};
    const int none3 = label_index(Schema::three_class, "none");
    const int racism3 = label_index(Schema::three_class, "racism");
    for (const auto& ex : corpus.examples()) {
        out.one_step.add(ex);
        Example step1 = ex;
        step1.label = ex.label == none3 ? 0 : 1;
        out.two_step_1.add(std::move(step1));
        if (ex.label != none3) {
            Example step2 = ex;
            step2.label = ex.label == racism3 ? label_index(Schema::sexism_racism, "racism")
                                              : label_index(Schema::sexism_racism, "sexism");
            out.two_step_2.add(std::move(step2));
        }
    }
    return out;
}

struct FoldPlan {
    int k = 0;
    std::vector<int> assignment;  // example index -> fold index
    std::uint64_t seed = 0;
};

// Stratified k-fold assignment. Classes are processed in label order; each
// class is shuffled, split into k chunks of size n/k, and the n%k leftover
// examples go to folds picked by a cursor that rotates across classes, so
// fold sizes stay as even as the counts allow.
inline FoldPlan stratified_folds(const LabeledCorpus& corpus, int k, std::uint64_t seed) {
    if (k < 2) throw DataError("stratified_folds: k must be >= 2");
    const int nc = num_classes(corpus.schema());
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(nc));
    for (std::size_t i = 0; i < corpus.size(); ++i)
        by_class[static_cast<std::size_t>(corpus[i].label)].push_back(static_cast<int>(i));
    for (int c = 0; c < nc; ++c) {
        if (static_cast<int>(by_class[static_cast<std::size_t>(c)].size()) < k)
            throw DataError("stratified_folds: class '" + class_names(corpus.schema())[static_cast<std::size_t>(c)] +
                            "' has fewer than k examples");
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.assign(corpus.size(), -1);
    Rng rng(derive_seed(seed, 0xf01d));
    int cursor = 0;
    for (int c = 0; c < nc; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(idx);
        const int n = static_cast<int>(idx.size());
        const int base = n / k;
        const int extra = n % k;
        std::vector<int> fold_size(static_cast<std::size_t>(k), base);
        for (int j = 0; j < extra; ++j) ++fold_size[static_cast<std::size_t>((cursor + j) % k)];
        cursor = (cursor + extra) % k;
        int pos = 0;
        for (int f = 0; f < k; ++f)
            for (int j = 0; j < fold_size[static_cast<std::size_t>(f)]; ++j)
                plan.assignment[static_cast<std::size_t>(idx[static_cast<std::size_t>(pos++)])] = f;
    }
    return plan;
}

// A subset of a corpus, by example index. Views never copy text.
struct CorpusView {
    const LabeledCorpus* corpus = nullptr;
    std::vector<int> indices;

    std::size_t size() const { return indices.size(); }
    const Example& example(std::size_t i) const { return (*corpus)[static_cast<std::size_t>(indices[i])]; }
    Schema schema() const { return corpus->schema(); }

    std::vector<long long> class_counts() const {
        std::vector<long long> counts(static_cast<std::size_t>(num_classes(schema())), 0);
        for (int i : indices) ++counts[static_cast<std::size_t>((*corpus)[static_cast<std::size_t>(i)].label)];
        return counts;
    }
};

inline CorpusView full_view(const LabeledCorpus& corpus) {
    CorpusView v;
    v.corpus = &corpus;
    v.indices.resize(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) v.indices[i] = static_cast<int>(i);
    return v;
}

inline CorpusView train_view(const LabeledCorpus& corpus, const FoldPlan& plan, int test_fold) {
    CorpusView v;
    v.corpus = &corpus;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (plan.assignment[i] != test_fold) v.indices.push_back(static_cast<int>(i));
    return v;
}

inline CorpusView test_view(const LabeledCorpus& corpus, const FoldPlan& plan, int test_fold) {
    CorpusView v;
    v.corpus = &corpus;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (plan.assignment[i] == test_fold) v.indices.push_back(static_cast<int>(i));
    return v;
}

// Copy a view into a standalone corpus, optionally relabeling. `relabel`
// maps the old label to the new one (or -1 to drop the example).
template <typename Fn>
inline LabeledCorpus subset_corpus(const CorpusView& view, Schema new_schema, Fn relabel) {
    LabeledCorpus out(new_schema);
    for (std::size_t i = 0; i < view.size(); ++i) {
        const Example& ex = view.example(i);
        int lab = relabel(ex.label);
        if (lab < 0) continue;
        Example copy = ex;
        copy.label = lab;
        out.add(std::move(copy));
    }
    return out;
}

// Infinite deterministic stream of class-balanced batches: per-batch class
// counts differ by at most one, each class is drawn from its own cyclic
// shuffle and reshuffled per pass, so minority classes repeat as needed.
class BalancedBatcher {
  public:
    BalancedBatcher(const CorpusView& view, int batch_size, std::uint64_t seed)
        : view_(view), batch_size_(batch_size), rng_(derive_seed(seed, 0xba7c)) {
        const int nc = num_classes(view.schema());
        if (batch_size < nc) throw DataError("balanced_batches: batch size smaller than class count");
        pools_.resize(static_cast<std::size_t>(nc));
        cursors_.assign(static_cast<std::size_t>(nc), 0);
        for (std::size_t i = 0; i < view.size(); ++i)
            pools_[static_cast<std::size_t>(view.example(i).label)].push_back(view.indices[i]);
        for (int c = 0; c < nc; ++c) {
            if (pools_[static_cast<std::size_t>(c)].empty())
                throw DataError("balanced_batches: class '" + class_names(view.schema())[static_cast<std::size_t>(c)] +
                                "' absent from the training view");
            rng_.shuffle(pools_[static_cast<std::size_t>(c)]);
        }
    }

    // Returns corpus-level example indices.
    std::vector<int> next() {
        const int nc = static_cast<int>(pools_.size());
        const int base = batch_size_ / nc;
        const int extra = batch_size_ % nc;
        std::vector<int> order(static_cast<std::size_t>(nc));
        for (int c = 0; c < nc; ++c) order[static_cast<std::size_t>(c)] = c;
        rng_.shuffle(order);
        std::vector<int> batch;
        batch.reserve(static_cast<std::size_t>(batch_size_));
        for (int j = 0; j < nc; ++j) {
            const int c = order[static_cast<std::size_t>(j)];
            const int take = base + (j < extra ? 1 : 0);
            for (int t = 0; t < take; ++t) batch.push_back(draw(c));
        }
        rng_.shuffle(batch);
        return batch;
    }

  private:
    int draw(int c) {
        auto& pool = pools_[static_cast<std::size_t>(c)];
        auto& cur = cursors_[static_cast<std::size_t>(c)];
        if (cur >= pool.size()) {
            rng_.shuffle(pool);
            cur = 0;
        }
        return pool[cur++];
    }

    CorpusView view_;
    int batch_size_;
    Rng rng_;
    std::vector<std::vector<int>> pools_;
    std::vector<std::size_t> cursors_;
};

// Synthetic desk-scale corpora. Each class owns a disjoint signal lexicon;
// texts mix signal tokens with shared filler tokens, plus an occasional
// hashtag glued from two signal words to exercise segmentation.
struct SynthSpec {
    std::vector<std::vector<std::string>> signal;  // one lexicon per class
    std::vector<long long> sizes;                  // examples per class
    std::vector<std::string> filler;
    double signal_rate = 0.5;
    int min_tokens = 6;
    int max_tokens = 12;
    double hashtag_rate = 0.0;
    Schema schema = Schema::three_class;
};

inline LabeledCorpus synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
    const int nc = num_classes(spec.schema);
    if (static_cast<int>(spec.signal.size()) != nc || static_cast<int>(spec.sizes.size()) != nc)
        throw DataError("synth_corpus: need one lexicon and one size per class");
    std::set<std::string> all_signal;
    for (const auto& lex : spec.signal) {
        if (lex.empty()) throw DataError("synth_corpus: empty signal lexicon");
        for (const auto& w : lex)
            if (!all_signal.insert(w).second)
                throw DataError("synth_corpus: signal word '" + w + "' appears in two lexicons");
    }
    if (spec.filler.empty() && spec.signal_rate < 1.0)
        throw DataError("synth_corpus: empty filler lexicon with signal_rate < 1");
    if (spec.min_tokens < 1 || spec.max_tokens < spec.min_tokens)
        throw DataError("synth_corpus: bad token count range");

    LabeledCorpus corpus(spec.schema);
    Rng rng(derive_seed(seed, 0x5e17));
    long long serial = 0;
    for (int c = 0; c < nc; ++c) {
        const auto& lex = spec.signal[static_cast<std::size_t>(c)];
        for (long long i = 0; i < spec.sizes[static_cast<std::size_t>(c)]; ++i) {
            const int n = spec.min_tokens +
                          static_cast<int>(rng.next_below(static_cast<std::size_t>(spec.max_tokens - spec.min_tokens + 1)));
            std::string text;
            for (int t = 0; t < n; ++t) {
                const bool sig = rng.next_unit() < spec.signal_rate;
                const std::string& w =
                    sig ? lex[rng.next_below(lex.size())] : spec.filler[rng.next_below(spec.filler.size())];
                if (!text.empty()) text += ' ';
                text += w;
            }
            if (spec.hashtag_rate > 0.0 && rng.next_unit() < spec.hashtag_rate) {
                text += " #";
                text += lex[rng.next_below(lex.size())];
                text += lex[rng.next_below(lex.size())];
            }
            Example ex;
            ex.id = "s" + std::to_string(serial++);
            ex.label = c;
            ex.text = std::move(text);
            corpus.add(std::move(ex));
        }
    }
    return corpus;
}

}  // namespace ald
