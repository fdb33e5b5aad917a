#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ald/error.hpp"
#include "ald/pipeline.hpp"

namespace ald {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw UsageError("bad integer list element '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("empty integer list");
    return out;
}

inline std::string join_int_list(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

// Flat key=value run configuration. A config file provides defaults and CLI
// flags override them; unknown keys are rejected.
struct RunConfig {
    // paths
    std::string dataset;
    std::string embeddings;
    std::string unigram_counts;
    std::string out_dir = ".";

    // experiment
    std::string mode = "one_step";  // one_step | two_step
    std::string model = "hybridcnn";
    std::string step1 = "hybridcnn";
    std::string step2 = "lr";
    std::string schema = "three_class";  // for train/predict on a single task
    int folds = 10;
    std::uint64_t seed = 1;
    double threshold = 0.5;

    // training
    int batch_size = 32;
    int max_epochs = 30;
    int patience = 3;
    double eval_fraction = 0.1;
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    // CNN sizes (full-size defaults)
    int l_char = 140;
    int l_word = 35;
    int embed_dim = 300;
    int char_conv_width = 4;
    int char_conv_maps = 1024;
    int char_pool = 3;
    int fc_units = 2048;
    std::vector<int> word_widths = {1, 2, 3};
    int word_maps = 50;
    std::vector<int> hybrid_char_widths = {3, 4, 5};
    int hybrid_char_maps = 50;
    double dropout = 0.5;
    double lambda = 1.0;

    // baselines
    double lr_lambda = 1e-4;
    double svm_lambda = 1e-4;
    double svm_hinge_scale = 1.0;
    int ft_dim = 100;
    bool ft_bigrams = false;
    int ft_buckets = 1 << 18;
    double ft_lambda = 0.0;

    // text preparation
    int min_freq = 1;
    int ngram_n_min = 1;
    int ngram_n_max = 4;
    int ngram_min_df = 2;
    bool segment_hashtags = true;

    // synthetic corpus generation
    std::vector<int> synth_sizes = {1354, 225, 421};
    double synth_signal_rate = 0.55;
    double synth_hashtag_rate = 0.15;
    int synth_min_tokens = 6;
    int synth_max_tokens = 12;

    bool verbose = false;

    void apply(const std::string& key, const std::string& value);
    void parse_file(const std::string& path);
    std::map<std::string, std::string> to_map() const;

    Schema parse_schema() const {
        if (schema == "three_class") return Schema::three_class;
        if (schema == "none_abusive") return Schema::none_abusive;
        if (schema == "sexism_racism") return Schema::sexism_racism;
        throw UsageError("unknown schema '" + schema + "'");
    }

    PipelineConfig pipeline_config() const {
        PipelineConfig cfg;
        cfg.model.l_char = l_char;
        cfg.model.l_word = l_word;
        cfg.model.embed_dim = embed_dim;
        cfg.model.char_conv_width = char_conv_width;
        cfg.model.char_conv_maps = char_conv_maps;
        cfg.model.char_pool = char_pool;
        cfg.model.fc_units = fc_units;
        cfg.model.word_widths = word_widths;
        cfg.model.word_maps = word_maps;
        cfg.model.hybrid_char_widths = hybrid_char_widths;
        cfg.model.hybrid_char_maps = hybrid_char_maps;
        cfg.model.dropout_rate = dropout;
        cfg.model.lambda = lambda;
        cfg.train.batch_size = batch_size;
        cfg.train.max_epochs = max_epochs;
        cfg.train.patience = patience;
        cfg.train.eval_fraction = eval_fraction;
        cfg.train.seed = seed;
        cfg.train.adam.alpha = alpha;
        cfg.train.adam.beta1 = beta1;
        cfg.train.adam.beta2 = beta2;
        cfg.train.adam.epsilon = epsilon;
        cfg.train.verbose = verbose;
        cfg.lr_lambda = lr_lambda;
        cfg.svm_lambda = svm_lambda;
        cfg.svm_hinge_scale = svm_hinge_scale;
        cfg.fasttext.dim = ft_dim;
        cfg.fasttext.use_bigrams = ft_bigrams;
        cfg.fasttext.bigram_buckets = ft_buckets;
        cfg.fasttext.lambda = ft_lambda;
        cfg.vocab_min_freq = min_freq;
        cfg.ngram_n_min = ngram_n_min;
        cfg.ngram_n_max = ngram_n_max;
        cfg.ngram_min_df = ngram_min_df;
        cfg.segment_hashtags = segment_hashtags;
        cfg.embeddings_path = embeddings;
        cfg.unigram_counts_path = unigram_counts;
        return cfg;
    }

    PipelineSpec pipeline_spec() const {
        PipelineSpec spec;
        if (mode == "one_step")
            spec.mode = PipelineSpec::Mode::one_step;
        else if (mode == "two_step")
            spec.mode = PipelineSpec::Mode::two_step;
        else
            throw UsageError("unknown mode '" + mode + "' (expected one_step|two_step)");
        spec.step1 = parse_system_kind(spec.mode == PipelineSpec::Mode::one_step ? model : step1);
        spec.step2 = parse_system_kind(step2);
        spec.folds = folds;
        spec.seed = seed;
        spec.threshold = threshold;
        return spec;
    }
};

namespace detail {

struct ConfigKey {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw UsageError("bad boolean value '" + v + "'");
}

inline const std::map<std::string, ConfigKey>& config_keys() {
    static const std::map<std::string, ConfigKey> keys = [] {
        std::map<std::string, ConfigKey> m;
        auto str = [&m](const std::string& k, std::string RunConfig::*field) {
            m[k] = {[field](RunConfig& c, const std::string& v) { c.*field = v; },
                    [field](const RunConfig& c) { return c.*field; }};
        };
        auto intf = [&m](const std::string& k, int RunConfig::*field) {
            m[k] = {[field, k](RunConfig& c, const std::string& v) {
                        try {
                            c.*field = std::stoi(v);
                        } catch (const std::exception&) {
                            throw UsageError("bad integer for '" + k + "': " + v);
                        }
                    },
                    [field](const RunConfig& c) { return std::to_string(c.*field); }};
        };
        auto dbl = [&m](const std::string& k, double RunConfig::*field) {
            m[k] = {[field, k](RunConfig& c, const std::string& v) {
                        try {
                            c.*field = std::stod(v);
                        } catch (const std::exception&) {
                            throw UsageError("bad number for '" + k + "': " + v);
                        }
                    },
                    [field](const RunConfig& c) { return fmt_double(c.*field); }};
        };
        auto boolf = [&m](const std::string& k, bool RunConfig::*field) {
            m[k] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); },
                    [field](const RunConfig& c) { return c.*field ? "true" : "false"; }};
        };
        auto ints = [&m](const std::string& k, std::vector<int> RunConfig::*field) {
            m[k] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_int_list(v); },
                    [field](const RunConfig& c) { return join_int_list(c.*field); }};
        };
        str("dataset", &RunConfig::dataset);
        str("embeddings", &RunConfig::embeddings);
        str("unigram_counts", &RunConfig::unigram_counts);
        str("out_dir", &RunConfig::out_dir);
        str("mode", &RunConfig::mode);
        str("model", &RunConfig::model);
        str("step1", &RunConfig::step1);
        str("step2", &RunConfig::step2);
        str("schema", &RunConfig::schema);
        intf("folds", &RunConfig::folds);
        m["seed"] = {[](RunConfig& c, const std::string& v) {
                         try {
                             c.seed = std::stoull(v);
                         } catch (const std::exception&) {
                             throw UsageError("bad seed: " + v);
                         }
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
        dbl("threshold", &RunConfig::threshold);
        intf("batch_size", &RunConfig::batch_size);
        intf("max_epochs", &RunConfig::max_epochs);
        intf("patience", &RunConfig::patience);
        dbl("eval_fraction", &RunConfig::eval_fraction);
        dbl("alpha", &RunConfig::alpha);
        dbl("beta1", &RunConfig::beta1);
        dbl("beta2", &RunConfig::beta2);
        dbl("epsilon", &RunConfig::epsilon);
        intf("l_char", &RunConfig::l_char);
        intf("l_word", &RunConfig::l_word);
        intf("embed_dim", &RunConfig::embed_dim);
        intf("char_conv_width", &RunConfig::char_conv_width);
        intf("char_conv_maps", &RunConfig::char_conv_maps);
        intf("char_pool", &RunConfig::char_pool);
        intf("fc_units", &RunConfig::fc_units);
        ints("word_widths", &RunConfig::word_widths);
        intf("word_maps", &RunConfig::word_maps);
        ints("hybrid_char_widths", &RunConfig::hybrid_char_widths);
        intf("hybrid_char_maps", &RunConfig::hybrid_char_maps);
        dbl("dropout", &RunConfig::dropout);
        dbl("lambda", &RunConfig::lambda);
        dbl("lr_lambda", &RunConfig::lr_lambda);
        dbl("svm_lambda", &RunConfig::svm_lambda);
        dbl("svm_hinge_scale", &RunConfig::svm_hinge_scale);
        intf("ft_dim", &RunConfig::ft_dim);
        boolf("ft_bigrams", &RunConfig::ft_bigrams);
        intf("ft_buckets", &RunConfig::ft_buckets);
        dbl("ft_lambda", &RunConfig::ft_lambda);
        intf("min_freq", &RunConfig::min_freq);
        intf("ngram_n_min", &RunConfig::ngram_n_min);
        intf("ngram_n_max", &RunConfig::ngram_n_max);
        intf("ngram_min_df", &RunConfig::ngram_min_df);
        boolf("segment_hashtags", &RunConfig::segment_hashtags);
        ints("synth_sizes", &RunConfig::synth_sizes);
        dbl("synth_signal_rate", &RunConfig::synth_signal_rate);
        dbl("synth_hashtag_rate", &RunConfig::synth_hashtag_rate);
        intf("synth_min_tokens", &RunConfig::synth_min_tokens);
        intf("synth_max_tokens", &RunConfig::synth_max_tokens);
        boolf("verbose", &RunConfig::verbose);
        return m;
    }();
    return keys;
}

}  // namespace detail

inline void RunConfig::apply(const std::string& key, const std::string& value) {
    const auto& keys = detail::config_keys();
    auto it = keys.find(key);
    if (it == keys.end()) throw UsageError("unknown config key '" + key + "'");
    it->second.set(*this, value);
}

inline void RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError(path + ":" + std::to_string(line_no) + ": empty key");
        try {
            apply(key, value);
        } catch (const UsageError& e) {
            throw UsageError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

inline std::map<std::string, std::string> RunConfig::to_map() const {
    std::map<std::string, std::string> out;
    for (const auto& [key, handlers] : detail::config_keys()) out[key] = handlers.get(*this);
    return out;
}

}  // namespace ald
