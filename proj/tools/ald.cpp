// Command-line driver: prepare / synth / train / predict / cv / compare /
// gradcheck. Config file values load first, then flags override. Exit codes:
// 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ald/cli.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // applied after the config file

    ald::RunConfig build() const {
        ald::RunConfig cfg;
        if (!config_path.empty()) cfg.parse_file(config_path);
        for (const auto& [key, value] : overrides) cfg.apply(key, value);
        return cfg;
    }
};

void add_common(CLI::App* cmd, CliState& state) {
    cmd->add_option("--config", state.config_path, "flat key = value config file");
    auto kv = [&state](const std::string& key) {
        return [&state, key](const std::string& v) { state.overrides.emplace_back(key, v); };
    };
    cmd->add_option_function<std::string>("--seed", kv("seed"), "RNG seed");
    cmd->add_option_function<std::string>("--out", kv("out_dir"), "output directory");
    cmd->add_option_function<std::string>("--dataset", kv("dataset"), "labeled TSV (id, label, text)");
    cmd->add_option_function<std::string>("--embeddings", kv("embeddings"), "embedding text file");
    cmd->add_option_function<std::string>("--unigram-counts", kv("unigram_counts"),
                                          "extra token<TAB>count file for hashtag segmentation");
    cmd->add_option_function<std::string>(
           "--set",
           [&state](const std::string& v) {
               const auto eq = v.find('=');
               if (eq == std::string::npos) throw CLI::ValidationError("--set expects key=value");
               state.overrides.emplace_back(v.substr(0, eq), v.substr(eq + 1));
           },
           "override any config key (repeatable)")
        ->trigger_on_parse();
}

void add_experiment_flags(CLI::App* cmd, CliState& state) {
    auto kv = [&state](const std::string& key) {
        return [&state, key](const std::string& v) { state.overrides.emplace_back(key, v); };
    };
    cmd->add_option_function<std::string>("--mode", kv("mode"), "one_step | two_step");
    cmd->add_option_function<std::string>("--model", kv("model"), "system for one-step runs");
    cmd->add_option_function<std::string>("--step1", kv("step1"), "step-1 system for two-step runs");
    cmd->add_option_function<std::string>("--step2", kv("step2"), "step-2 system for two-step runs");
    cmd->add_option_function<std::string>("--folds", kv("folds"), "cross-validation fold count");
    cmd->add_option_function<std::string>("--threshold", kv("threshold"), "step-1 abusive threshold");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-step and two-step abusive language classification"};
    app.require_subcommand(1);

    CliState state;
    auto* prepare = app.add_subcommand("prepare", "segment a 3-class dataset into the three task views");
    add_common(prepare, state);

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus and matching embeddings");
    add_common(synth, state);

    auto* train = app.add_subcommand("train", "train one system on the full dataset and save the model");
    add_common(train, state);
    std::string model_out;
    train->add_option("--model-out", model_out, "model file to write (default <out>/model.ald)");
    train->add_option_function<std::string>(
        "--model", [&state](const std::string& v) { state.overrides.emplace_back("model", v); }, "system to train");
    train->add_option_function<std::string>(
        "--schema", [&state](const std::string& v) { state.overrides.emplace_back("schema", v); },
        "three_class | none_abusive | sexism_racism");

    auto* predict = app.add_subcommand("predict", "load a model and label input rows");
    add_common(predict, state);
    std::string model_path, input_path;
    predict->add_option("model", model_path, "model file from `train`")->required();
    predict->add_option("input", input_path, "TSV rows: id<TAB>text or id<TAB>label<TAB>text")->required();

    auto* cv = app.add_subcommand("cv", "k-fold cross-validation experiment");
    add_common(cv, state);
    add_experiment_flags(cv, state);

    auto* compare = app.add_subcommand("compare", "run one-step and two-step side by side");
    add_common(compare, state);
    add_experiment_flags(compare, state);

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::string gradcheck_kind = "hybridcnn";
    bool inject_bug = false;
    gradcheck->add_option("kind", gradcheck_kind, "lr|svm|fasttext|charcnn|wordcnn|hybridcnn");
    gradcheck->add_flag("--inject-bug", inject_bug, "flip analytic gradient signs (harness self-test)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*prepare) return ald::cmd_prepare(state.build());
        if (*synth) return ald::cmd_synth(state.build());
        if (*train) {
            const ald::RunConfig cfg = state.build();
            const std::string out = model_out.empty()
                                        ? (std::filesystem::path(cfg.out_dir) / "model.ald").string()
                                        : model_out;
            return ald::cmd_train(cfg, out);
        }
        if (*predict) return ald::cmd_predict(state.build(), model_path, input_path);
        if (*cv) return ald::cmd_cv(state.build());
        if (*compare) return ald::cmd_compare(state.build());
        if (*gradcheck) return ald::cmd_gradcheck(gradcheck_kind, inject_bug);
    } catch (const ald::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ald::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const ald::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
