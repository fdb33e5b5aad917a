#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ald/artifact.hpp"
#include "ald/config.hpp"
#include "ald/gradcheck.hpp"
#include "ald/pipeline.hpp"

namespace ald {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("failed while writing file: " + path);
}

inline void write_corpus_tsv(const std::string& path, const LabeledCorpus& corpus) {
    std::ostringstream os;
    const auto& names = class_names(corpus.schema());
    for (const auto& ex : corpus.examples())
        os << ex.id << "\t" << names[static_cast<std::size_t>(ex.label)] << "\t" << ex.text << "\n";
    write_text_file(path, os.str());
}

inline std::string counts_summary(const SegmentedDatasets& seg) {
    std::ostringstream os;
    os << "segment\tlabel\tcount\n";
    const auto emit = [&os](const char* segment, const LabeledCorpus& corpus) {
        const auto counts = corpus.class_counts();
        const auto& names = class_names(corpus.schema());
        for (std::size_t c = 0; c < names.size(); ++c)
            os << segment << "\t" << names[c] << "\t" << counts[c] << "\n";
    };
    emit("one_step", seg.one_step);
    emit("two_step_1", seg.two_step_1);
    emit("two_step_2", seg.two_step_2);
    os << "total\texamples\t" << seg.one_step.size() << "\n";
    return os.str();
}

// prepare: read the 3-class TSV, emit the three dataset segmentations plus
// a counts summary.
inline int cmd_prepare(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw UsageError("prepare: set dataset=... (or --dataset)");
    std::filesystem::create_directories(cfg.out_dir);
    const LabeledCorpus corpus = load_dataset(cfg.dataset, Schema::three_class);
    const SegmentedDatasets seg = segment_datasets(corpus);
    const std::filesystem::path out(cfg.out_dir);
    write_corpus_tsv((out / "one_step.tsv").string(), seg.one_step);
    write_corpus_tsv((out / "two_step_1.tsv").string(), seg.two_step_1);
    write_corpus_tsv((out / "two_step_2.tsv").string(), seg.two_step_2);
    const std::string summary = counts_summary(seg);
    write_text_file((out / "counts.tsv").string(), summary);
    std::cout << summary;
    return 0;
}

// Built-in lexicons for synthetic corpora. Deliberately innocuous words;
// the class signal is which lexicon a token comes from, nothing else.
inline SynthSpec default_synth_spec(const RunConfig& cfg) {
    SynthSpec spec;
    spec.signal = {
        {"river", "meadow", "cloud", "pebble", "orchard", "lantern", "harbor", "willow"},
        {"quartz", "ember", "falcon", "timber", "cobalt", "ridge", "summit", "glacier"},
        {"violet", "saffron", "maple", "comet", "prairie", "tundra", "canyon", "aurora"},
    };
    spec.filler = {"the",  "a",     "and",  "to",   "of",    "in",   "it",    "is",
                   "was",  "on",    "for",  "with", "at",    "by",   "about", "into",
                   "after", "before", "over", "under", "again", "then", "once",  "here"};
    if (cfg.synth_sizes.size() != 3) throw UsageError("synth: synth_sizes needs exactly three class counts");
    spec.sizes.assign(cfg.synth_sizes.begin(), cfg.synth_sizes.end());
    spec.signal_rate = cfg.synth_signal_rate;
    spec.hashtag_rate = cfg.synth_hashtag_rate;
    spec.min_tokens = cfg.synth_min_tokens;
    spec.max_tokens = cfg.synth_max_tokens;
    return spec;
}

inline std::string render_synth_embeddings(const SynthSpec& spec, int dim, std::uint64_t seed) {
    std::vector<std::string> words;
    for (const auto& lex : spec.signal) words.insert(words.end(), lex.begin(), lex.end());
    words.insert(words.end(), spec.filler.begin(), spec.filler.end());
    std::sort(words.begin(), words.end());
    std::ostringstream os;
    os << words.size() << " " << dim << "\n";
    char buf[32];
    for (const auto& w : words) {
        Fnv64 h;
        h.update(w);
        Rng rng(derive_seed(seed, h.digest()));
        os << w;
        for (int d = 0; d < dim; ++d) {
            std::snprintf(buf, sizeof buf, "%.6f", rng.next_uniform(-0.5, 0.5));
            os << " " << buf;
        }
        os << "\n";
    }
    return os.str();
}

// synth: deterministic desk-scale corpus plus a matching embedding file.
inline int cmd_synth(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const SynthSpec spec = default_synth_spec(cfg);
    const LabeledCorpus corpus = synth_corpus(spec, cfg.seed);
    const std::filesystem::path out(cfg.out_dir);
    write_corpus_tsv((out / "synth.tsv").string(), corpus);
    write_text_file((out / "synth_embeddings.txt").string(),
                    render_synth_embeddings(spec, cfg.embed_dim, cfg.seed));
    const auto counts = corpus.class_counts();
    std::cout << "synth corpus: " << corpus.size() << " examples (";
    for (std::size_t c = 0; c < counts.size(); ++c)
        std::cout << (c ? ", " : "") << class_names(corpus.schema())[c] << " " << counts[c];
    std::cout << ") -> " << (out / "synth.tsv").string() << "\n";
    return 0;
}

// train: fit one system on the whole dataset and persist the artifact.
inline int cmd_train(const RunConfig& cfg, const std::string& model_out) {
    if (cfg.dataset.empty()) throw UsageError("train: set dataset=... (or --dataset)");
    const Schema schema = cfg.parse_schema();
    const LabeledCorpus corpus = load_dataset(cfg.dataset, schema);
    const CorpusView view = full_view(corpus);
    const PipelineConfig pcfg = cfg.pipeline_config();
    const SystemKind kind = parse_system_kind(cfg.model);
    const FoldArtifacts art = fit_artifacts(view, pcfg, needs_for(kind));
    auto system = build_system(kind, num_classes(schema), art, pcfg, derive_seed(cfg.seed, 0x7a));
    TrainConfig tc = pcfg.train;
    tc.seed = derive_seed(cfg.seed, 0x7b);
    const TrainReport report = train(*system, view, tc);
    std::cout << "trained " << cfg.model << ": " << report.total_batches << " batches, best epoch "
              << report.best_epoch << " (eval loss "
              << (report.best_epoch > 0 ? report.eval_loss[static_cast<std::size_t>(report.best_epoch - 1)] : 0.0)
              << ")\n";

    ModelArtifact artifact;
    artifact.kind = cfg.model;
    artifact.schema = cfg.schema;
    artifact.n_classes = num_classes(schema);
    artifact.alphabet_hash = art.alphabet->hash();
    artifact.vocab_hash = art.has_vocab ? art.vocab.hash() : 0;
    artifact.unigram_hash = art.has_vocab ? art.unigram.hash() : 0;
    artifact.config = cfg.to_map();
    artifact.tensors = system->params().snapshot_values();
    std::filesystem::create_directories(std::filesystem::path(model_out).parent_path().empty()
                                            ? "."
                                            : std::filesystem::path(model_out).parent_path().string());
    save_artifact(model_out, artifact);
    std::cout << "model written to " << model_out << "\n";
    return 0;
}

// predict: rebuild preprocessing from the config paths, verify it matches
// the artifact's fingerprints, then emit id, label, and class probabilities
// per input row.
inline int cmd_predict(const RunConfig& cfg, const std::string& model_path, const std::string& input_path,
                       std::ostream& out = std::cout) {
    const ModelArtifact artifact = load_artifact(model_path);
    RunConfig art_cfg;
    for (const auto& [key, value] : artifact.config) art_cfg.apply(key, value);
    // The data sources for rebuilding vocab/unigram state come from the
    // caller's config; everything about sizes and encoding comes from the
    // artifact so the model sees the exact inputs it trained on.
    if (!cfg.dataset.empty()) art_cfg.dataset = cfg.dataset;
    if (!cfg.embeddings.empty()) art_cfg.embeddings = cfg.embeddings;
    if (!cfg.unigram_counts.empty()) art_cfg.unigram_counts = cfg.unigram_counts;

    Schema schema = Schema::three_class;
    if (artifact.schema == "none_abusive") schema = Schema::none_abusive;
    if (artifact.schema == "sexism_racism") schema = Schema::sexism_racism;
    const SystemKind kind = parse_system_kind(artifact.kind);
    const ArtifactNeeds needs = needs_for(kind);
    const PipelineConfig pcfg = art_cfg.pipeline_config();

    LabeledCorpus fit_corpus(schema);
    FoldArtifacts art;
    if (needs.vocab || needs.ngrams) {
        if (art_cfg.dataset.empty()) throw UsageError("predict: set dataset=... to rebuild the vocabulary");
        fit_corpus = load_dataset(art_cfg.dataset, schema);
        art = fit_artifacts(full_view(fit_corpus), pcfg, needs);
    }
    if (art.alphabet->hash() != artifact.alphabet_hash)
        throw DataError("predict: alphabet hash mismatch between artifact and this build");
    if (needs.vocab) {
        if (art.vocab.hash() != artifact.vocab_hash)
            throw DataError("predict: vocabulary hash mismatch; dataset differs from the training corpus");
        if (art.unigram.hash() != artifact.unigram_hash)
            throw DataError("predict: unigram model hash mismatch; dataset or counts file differs from training");
    }
    auto system = build_system(kind, artifact.n_classes, art, pcfg, 0);
    assign_tensors(system->params(), artifact.tensors);

    std::ifstream in(input_path);
    if (!in) throw DataError("cannot open input file: " + input_path);
    const auto& names = class_names(schema);
    std::string line;
    long long line_no = 0;
    char buf[32];
    std::ostringstream collected;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        if (tab1 == std::string::npos)
            throw DataError(input_path + ":" + std::to_string(line_no) + ": expected id<TAB>[label<TAB>]text");
        Example ex;
        ex.id = line.substr(0, tab1);
        const auto tab2 = line.find('\t', tab1 + 1);
        // Accept full dataset rows by skipping a valid label column.
        if (tab2 != std::string::npos && label_index(schema, line.substr(tab1 + 1, tab2 - tab1 - 1)) >= 0)
            ex.text = line.substr(tab2 + 1);
        else
            ex.text = line.substr(tab1 + 1);
        const auto probs = system->probabilities(ex);
        int best = 0;
        for (std::size_t c = 1; c < probs.size(); ++c)
            if (probs[c] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        collected << ex.id << "\t" << names[static_cast<std::size_t>(best)];
        for (double p : probs) {
            std::snprintf(buf, sizeof buf, "%.6f", p);
            collected << "\t" << buf;
        }
        collected << "\n";
    }
    out << collected.str();  // buffered: a corrupt artifact never produces partial output
    return 0;
}

namespace detail {

inline void echo_and_append(std::string& report, const std::string& table) {
    std::cout << table << "\n";
    report += table;
    report += "\n";
}

}  // namespace detail

// cv: run the configured experiment, write the TSV reports, echo the
// paper-shaped tables.
inline int cmd_cv(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw UsageError("cv: set dataset=... (or --dataset)");
    std::filesystem::create_directories(cfg.out_dir);
    const LabeledCorpus corpus = load_dataset(cfg.dataset, Schema::three_class);
    const PipelineSpec spec = cfg.pipeline_spec();
    const PipelineConfig pcfg = cfg.pipeline_config();
    const std::filesystem::path out(cfg.out_dir);
    std::string report;
    if (spec.mode == PipelineSpec::Mode::one_step) {
        const ExperimentResult res = run_one_step(spec, corpus, pcfg);
        const std::vector<std::pair<std::string, PRF>> rows = {{system_name(spec.step1), res.total}};
        write_text_file((out / "results_one_step.tsv").string(),
                        render_tsv(rows, class_names(Schema::three_class)));
        detail::echo_and_append(report, render_table(rows, class_names(Schema::three_class),
                                                     "One-step classification (" + std::to_string(spec.folds) +
                                                         "-fold CV)"));
    } else {
        const ExperimentResult res = run_two_step(spec, corpus, pcfg);
        const std::string label = system_name(spec.step1) + "+" + system_name(spec.step2) + " (two)";
        const std::vector<std::pair<std::string, PRF>> rows = {{label, res.total}};
        write_text_file((out / "results_two_step.tsv").string(),
                        render_tsv(rows, class_names(Schema::three_class)));
        const std::vector<std::pair<std::string, PRF>> rows1 = {{system_name(spec.step1), *res.step1_total}};
        write_text_file((out / "results_step1.tsv").string(), render_tsv(rows1, class_names(Schema::none_abusive)));
        const std::vector<std::pair<std::string, PRF>> rows2 = {{system_name(spec.step2), *res.step2_total}};
        write_text_file((out / "results_step2.tsv").string(), render_tsv(rows2, class_names(Schema::sexism_racism)));
        detail::echo_and_append(report, render_table(rows, class_names(Schema::three_class),
                                                     "Two-step classification, composed (" +
                                                         std::to_string(spec.folds) + "-fold CV)"));
        detail::echo_and_append(report,
                                render_table(rows1, class_names(Schema::none_abusive), "Abusive language detection"));
        detail::echo_and_append(report,
                                render_table(rows2, class_names(Schema::sexism_racism), "Sexist/racist classification"));
    }
    write_text_file((out / "report.txt").string(), report);
    return 0;
}

// compare: one-step model vs two-step pair, side by side.
inline int cmd_compare(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw UsageError("compare: set dataset=... (or --dataset)");
    std::filesystem::create_directories(cfg.out_dir);
    const LabeledCorpus corpus = load_dataset(cfg.dataset, Schema::three_class);
    const PipelineConfig pcfg = cfg.pipeline_config();
    PipelineSpec one = cfg.pipeline_spec();
    one.mode = PipelineSpec::Mode::one_step;
    one.step1 = parse_system_kind(cfg.model);
    PipelineSpec two = one;
    two.mode = PipelineSpec::Mode::two_step;
    two.step1 = parse_system_kind(cfg.step1);
    two.step2 = parse_system_kind(cfg.step2);

    const ExperimentResult res1 = run_one_step(one, corpus, pcfg);
    const ExperimentResult res2 = run_two_step(two, corpus, pcfg);
    const std::filesystem::path out(cfg.out_dir);
    std::string report;
    const std::vector<std::pair<std::string, PRF>> rows = {
        {system_name(one.step1), res1.total},
        {system_name(two.step1) + "+" + system_name(two.step2) + " (two)", res2.total},
    };
    write_text_file((out / "results_one_step.tsv").string(),
                    render_tsv({rows[0]}, class_names(Schema::three_class)));
    write_text_file((out / "results_two_step.tsv").string(),
                    render_tsv({rows[1]}, class_names(Schema::three_class)));
    const std::vector<std::pair<std::string, PRF>> rows1 = {{system_name(two.step1), *res2.step1_total}};
    write_text_file((out / "results_step1.tsv").string(), render_tsv(rows1, class_names(Schema::none_abusive)));
    const std::vector<std::pair<std::string, PRF>> rows2 = {{system_name(two.step2), *res2.step2_total}};
    write_text_file((out / "results_step2.tsv").string(), render_tsv(rows2, class_names(Schema::sexism_racism)));
    detail::echo_and_append(report, render_table(rows, class_names(Schema::three_class),
                                                 "One-step vs two-step (" + std::to_string(one.folds) + "-fold CV)"));
    detail::echo_and_append(report, render_table(rows1, class_names(Schema::none_abusive), "Abusive language detection"));
    detail::echo_and_append(report, render_table(rows2, class_names(Schema::sexism_racism), "Sexist/racist classification"));
    const double delta = res2.total.weighted_f1 - res1.total.weighted_f1;
    char buf[64];
    std::snprintf(buf, sizeof buf, "two-step minus one-step total F1: %+.3f\n", delta);
    std::cout << buf;
    report += buf;
    write_text_file((out / "report.txt").string(), report);
    return 0;
}

// gradcheck: reduced-size finite-difference verification; exit 0 iff the
// max relative error is below 1e-4.
inline int cmd_gradcheck(const std::string& kind_name, bool inject_bug) {
    GradCheckOptions options;
    options.corrupt_sign = inject_bug;
    const SystemKind kind = parse_system_kind(kind_name);
    const GradCheckReport report = gradcheck_system(kind, options);
    char buf[160];
    std::snprintf(buf, sizeof buf, "gradcheck %s%s: max relative error %.3e over %d coordinates (worst %s[%d])\n",
                  kind_name.c_str(), inject_bug ? " [injected bug]" : "", report.max_rel_err, report.coords_checked,
                  report.worst_param.c_str(), report.worst_index);
    std::cout << buf;
    return report.max_rel_err < 1e-4 ? 0 : 3;
}

}  // namespace ald
