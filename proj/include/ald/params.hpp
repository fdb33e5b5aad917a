#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "ald/error.hpp"
#include "ald/rng.hpp"
#include "ald/tensor.hpp"

namespace ald {

struct ParamEntry {
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
    bool trainable = true;
};

// Named dense parameters with accumulated gradients and Adam state. A store
// belongs to one training run; frozen copies may be shared for inference.
class ParamStore {
  public:
    Tensor& create(const std::string& name, std::vector<int> shape, bool trainable = true) {
        if (entries_.count(name)) throw DataError("param '" + name + "' already exists");
        ParamEntry e;
        e.value = Tensor(shape);
        if (trainable) {  // frozen entries never receive gradients or Adam state
            e.grad = Tensor(shape);
            e.adam_m = Tensor(shape);
            e.adam_v = Tensor(shape);
        }
        e.trainable = trainable;
        auto [it, ok] = entries_.emplace(name, std::move(e));
        (void)ok;
        return it->second.value;
    }

    bool has(const std::string& name) const { return entries_.count(name) > 0; }

    ParamEntry& entry(const std::string& name) {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw DataError("unknown param '" + name + "'");
        return it->second;
    }

    const ParamEntry& entry(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw DataError("unknown param '" + name + "'");
        return it->second;
    }

    std::map<std::string, ParamEntry>& entries() { return entries_; }
    const std::map<std::string, ParamEntry>& entries() const { return entries_; }

    void zero_grads() {
        for (auto& [name, e] : entries_) e.grad.fill(0.0);
        grads_populated_ = false;
    }

    void note_grads_populated() { grads_populated_ = true; }
    bool grads_populated() const { return grads_populated_; }

    std::map<std::string, Tensor> snapshot_values() const {
        std::map<std::string, Tensor> snap;
        for (const auto& [name, e] : entries_) snap[name] = e.value;
        return snap;
    }

    void restore_values(const std::map<std::string, Tensor>& snap) {
        for (const auto& [name, v] : snap) entry(name).value = v;
    }

    std::uint64_t values_hash() const {
        Fnv64 h;
        for (const auto& [name, e] : entries_) {
            h.update(name);
            h.update_u64(e.value.content_hash());
        }
        return h.digest();
    }

    double grad_norm() const {
        double s = 0.0;
        for (const auto& [name, e] : entries_) s += e.grad.squared_norm();
        return std::sqrt(s);
    }

    double value_norm() const {
        double s = 0.0;
        for (const auto& [name, e] : entries_) s += e.value.squared_norm();
        return std::sqrt(s);
    }

  private:
    std::map<std::string, ParamEntry> entries_;
    bool grads_populated_ = false;
};

// Glorot-uniform init; biases stay zero by convention (create() zero-fills).
inline void init_uniform_glorot(Tensor& w, int fan_in, int fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : w.data) x = rng.next_uniform(-bound, bound);
}

struct AdamHyper {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long long t = 0;

    void validate() const {
        if (!(alpha > 0.0) || !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) || !(epsilon > 0.0) ||
            t < 0)
            throw DataError("adam: hyperparameters out of range");
    }
};

// One Adam update with bias correction. Gradients must have been populated
// by a backward pass (or add_l2); they are zeroed afterwards. Non-trainable
// entries are never touched.
inline void adam_step(ParamStore& store, AdamHyper& hyper) {
    hyper.validate();
    if (!store.grads_populated()) throw NumericError("adam_step: gradients have not been populated");
    hyper.t += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(hyper.t));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(hyper.t));
    for (auto& [name, e] : store.entries()) {
        if (!e.trainable) continue;
        for (std::size_t i = 0; i < e.value.data.size(); ++i) {
            const double g = e.grad.data[i];
            e.adam_m.data[i] = hyper.beta1 * e.adam_m.data[i] + (1.0 - hyper.beta1) * g;
            e.adam_v.data[i] = hyper.beta2 * e.adam_v.data[i] + (1.0 - hyper.beta2) * g * g;
            const double m_hat = e.adam_m.data[i] / bc1;
            const double v_hat = e.adam_v.data[i] / bc2;
            e.value.data[i] -= hyper.alpha * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
        }
    }
    store.zero_grads();
}

inline bool default_l2_filter(const std::string& name) {
    return name.size() >= 2 && name.compare(name.size() - 2, 2, ".W") == 0;
}

// Penalty value alone, no gradient side effects.
inline double l2_penalty(const ParamStore& store, double lambda,
                         const std::function<bool(const std::string&)>& include = default_l2_filter) {
    if (lambda == 0.0) return 0.0;
    double penalty = 0.0;
    for (const auto& [name, e] : store.entries())
        if (e.trainable && include(name)) penalty += e.value.squared_norm();
    return lambda * penalty;
}

// Additive L2 penalty: returns loss + lambda * sum ||w||^2 over included
// parameters and accumulates the matching 2*lambda*w into their gradients.
// The default filter selects weight matrices only (".W"), never biases or
// embedding tables.
inline double add_l2(double loss, ParamStore& store, double lambda,
                     const std::function<bool(const std::string&)>& include = default_l2_filter) {
    if (lambda < 0.0) throw DataError("add_l2: lambda must be >= 0");
    if (lambda == 0.0) return loss;
    double penalty = 0.0;
    for (auto& [name, e] : store.entries()) {
        if (!e.trainable || !include(name)) continue;
        penalty += e.value.squared_norm();
        for (std::size_t i = 0; i < e.value.data.size(); ++i)
            e.grad.data[i] += 2.0 * lambda * e.value.data[i];
    }
    store.note_grads_populated();
    return loss + lambda * penalty;
}

}  // namespace ald
