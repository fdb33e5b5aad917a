#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ald/autodiff.hpp"
#include "ald/corpus.hpp"
#include "ald/params.hpp"

namespace ald {

// Common contract for every trainable system (CNNs and baselines alike):
// build a per-example loss on a tape, expose infer-mode scores, own a
// parameter store. The trainer, CV driver, and two-step composition only
// talk to this interface.
class Classifier {
  public:
    virtual ~Classifier() = default;

    virtual const std::string& name() const = 0;
    virtual int num_classes() const = 0;
    virtual ParamStore& params() = 0;
    virtual const ParamStore& params() const = 0;

    // Records the example's loss on the tape. `rng` drives dropout in train
    // mode and must not be touched in infer mode.
    virtual Tape::Ref loss_node(Tape& tape, const Example& ex, Mode mode, Rng& rng) const = 0;

    // Infer-mode class scores (logits or margins, depending on the system).
    virtual std::vector<double> scores(const Example& ex) const = 0;

    // L2 strength applied by the trainer; the filter picks which parameters
    // the penalty covers.
    virtual double l2_lambda() const = 0;
    virtual bool l2_includes(const std::string& param_name) const { return default_l2_filter(param_name); }

    std::vector<double> probabilities(const Example& ex) const { return Tape::softmax(scores(ex)); }

    int predict(const Example& ex) const {
        const auto s = scores(ex);
        int best = 0;
        for (std::size_t c = 1; c < s.size(); ++c)
            if (s[c] > s[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        return best;
    }
};

}  // namespace ald
