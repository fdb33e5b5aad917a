#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <deque>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ald/error.hpp"
#include "ald/params.hpp"
#include "ald/rng.hpp"
#include "ald/tensor.hpp"

namespace ald {

enum class Mode { train, infer };

#ifndef NDEBUG
#define ALD_CHECK_FINITE 1
#endif

// Reverse-mode tape over the handful of dense ops the models need. One tape
// records one example's forward pass; backward() accumulates parameter
// gradients into the bound ParamStore, so batches sum naturally.
class Tape {
  public:
    using Ref = int;

    explicit Tape(ParamStore* store = nullptr) : store_(store) {}

    Ref input(Tensor v) {
        Node n;
        n.owned = std::move(v);
        return push(std::move(n));
    }

    Ref param(const std::string& name) {
        if (!store_) throw DataError("tape: no parameter store bound");
        Node n;
        n.param = &store_->entry(name);
        return push(std::move(n));
    }

    const Tensor& value(Ref r) const {
        const Node& n = node(r);
        return n.param ? n.param->value : n.owned;
    }
    double scalar(Ref r) const {
        const Tensor& t = value(r);
        if (t.numel() != 1) throw NumericError("tape: node is not a scalar");
        return t.data[0];
    }

    // out[t,m] = bias[m] + sum_{w,d} in[t+w,d] * filters[w,d,m]; valid
    // (no padding) cross-correlation.
    Ref conv1d(Ref in_ref, Ref filt_ref, Ref bias_ref) {
        const Tensor& in = value(in_ref);
        const Tensor& filt = value(filt_ref);
        const Tensor& bias = value(bias_ref);
        if (in.shape.size() != 2 || filt.shape.size() != 3 || bias.shape.size() != 1)
            throw DataError("conv1d: expected input (L,D), filters (W,D,M), bias (M)");
        const int L = in.shape[0], D = in.shape[1];
        const int W = filt.shape[0], M = filt.shape[2];
        if (filt.shape[1] != D) throw DataError("conv1d: filter depth does not match input");
        if (bias.shape[0] != M) throw DataError("conv1d: bias length does not match maps");
        if (L < W) throw DataError("conv1d: input shorter than filter width; caller must pad");
        const int T = L - W + 1;
        Tensor out({T, M});
        for (int t = 0; t < T; ++t) {
            double* orow = &out.data[static_cast<std::size_t>(t) * M];
            for (int m = 0; m < M; ++m) orow[m] = bias.data[static_cast<std::size_t>(m)];
            for (int w = 0; w < W; ++w) {
                const double* irow = &in.data[static_cast<std::size_t>(t + w) * D];
                const double* frow = &filt.data[static_cast<std::size_t>(w) * D * M];
                for (int d = 0; d < D; ++d) {
                    const double x = irow[d];
                    if (x == 0.0) continue;  // one-hot and padded rows are mostly zero
                    const double* fm = &frow[static_cast<std::size_t>(d) * M];
                    for (int m = 0; m < M; ++m) orow[m] += x * fm[m];
                }
            }
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref, filt_ref, bias_ref, L, D, W, M, T]() {
            const Tensor& g = node(r).grad;
            const Tensor& in = value(in_ref);
            const Tensor& filt = value(filt_ref);
            Tensor* gin = grad_target(in_ref);
            Tensor* gfilt = grad_target(filt_ref);
            Tensor* gbias = grad_target(bias_ref);
            for (int t = 0; t < T; ++t) {
                const double* grow = &g.data[static_cast<std::size_t>(t) * M];
                if (gbias)
                    for (int m = 0; m < M; ++m) gbias->data[static_cast<std::size_t>(m)] += grow[m];
                for (int w = 0; w < W; ++w) {
                    const double* irow = &in.data[static_cast<std::size_t>(t + w) * D];
                    for (int d = 0; d < D; ++d) {
                        const std::size_t fbase = (static_cast<std::size_t>(w) * D + d) * M;
                        if (gfilt) {
                            const double x = irow[d];
                            if (x != 0.0) {
                                double* gf = &gfilt->data[fbase];
                                for (int m = 0; m < M; ++m) gf[m] += x * grow[m];
                            }
                        }
                        if (gin) {
                            const double* fm = &filt.data[fbase];
                            double acc = 0.0;
                            for (int m = 0; m < M; ++m) acc += grow[m] * fm[m];
                            gin->data[static_cast<std::size_t>(t + w) * D + d] += acc;
                        }
                    }
                }
            }
        };
        return r;
    }

    // Per-channel max over sliding windows; gradient routes to the first
    // maximum of each window.
    Ref maxpool1d(Ref in_ref, int width, int stride) {
        const Tensor& in = value(in_ref);
        if (in.shape.size() != 2) throw DataError("maxpool1d: expected (L,M) input");
        if (width < 1 || stride < 1) throw DataError("maxpool1d: width and stride must be >= 1");
        const int L = in.shape[0], M = in.shape[1];
        if (L < width) throw DataError("maxpool1d: input shorter than pooling window");
        const int T = (L - width) / stride + 1;
        Tensor out({T, M});
        auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(T) * M);
        for (int t = 0; t < T; ++t) {
            for (int m = 0; m < M; ++m) {
                int best = t * stride;
                double bv = in.at(best, m);
                for (int off = 1; off < width; ++off) {
                    const double v = in.at(t * stride + off, m);
                    if (v > bv) {
                        bv = v;
                        best = t * stride + off;
                    }
                }
                out.at(t, m) = bv;
                (*argmax)[static_cast<std::size_t>(t) * M + m] = best;
            }
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref, argmax, M]() {
            Tensor* gin = grad_target(in_ref);
            if (!gin) return;
            const Tensor& g = node(r).grad;
            const int T = g.shape[0];
            for (int t = 0; t < T; ++t)
                for (int m = 0; m < M; ++m)
                    gin->at((*argmax)[static_cast<std::size_t>(t) * M + m], m) += g.at(t, m);
        };
        return r;
    }

    // 1-max pooling over the whole time axis.
    Ref global_maxpool(Ref in_ref) {
        const Tensor& in = value(in_ref);
        if (in.shape.size() != 2 || in.shape[0] < 1) throw DataError("global_maxpool: expected nonempty (L,M) input");
        const int L = in.shape[0], M = in.shape[1];
        Tensor out({M});
        auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m) {
            int best = 0;
            double bv = in.at(0, m);
            for (int t = 1; t < L; ++t) {
                const double v = in.at(t, m);
                if (v > bv) {
                    bv = v;
                    best = t;
                }
            }
            out.data[static_cast<std::size_t>(m)] = bv;
            (*argmax)[static_cast<std::size_t>(m)] = best;
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref, argmax, M]() {
            Tensor* gin = grad_target(in_ref);
            if (!gin) return;
            const Tensor& g = node(r).grad;
            for (int m = 0; m < M; ++m) gin->at((*argmax)[static_cast<std::size_t>(m)], m) += g.data[static_cast<std::size_t>(m)];
        };
        return r;
    }

    // out[k] = bias[k] + sum_n in[n] * weight[n,k]
    Ref dense(Ref in_ref, Ref w_ref, Ref b_ref) {
        const Tensor& in = value(in_ref);
        const Tensor& w = value(w_ref);
        const Tensor& b = value(b_ref);
        if (w.shape.size() != 2 || b.shape.size() != 1) throw DataError("dense: expected weight (N,K), bias (K)");
        const int N = w.shape[0], K = w.shape[1];
        if (in.numel() != N) throw DataError("dense: input length does not match weight rows");
        if (b.shape[0] != K) throw DataError("dense: bias length does not match weight cols");
        Tensor out({K});
        for (int k = 0; k < K; ++k) out.data[static_cast<std::size_t>(k)] = b.data[static_cast<std::size_t>(k)];
        for (int n2 = 0; n2 < N; ++n2) {
            const double x = in.data[static_cast<std::size_t>(n2)];
            if (x == 0.0) continue;
            const double* wrow = &w.data[static_cast<std::size_t>(n2) * K];
            for (int k = 0; k < K; ++k) out.data[static_cast<std::size_t>(k)] += x * wrow[k];
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref, w_ref, b_ref, N, K]() {
            const Tensor& g = node(r).grad;
            const Tensor& in = value(in_ref);
            const Tensor& w = value(w_ref);
            Tensor* gin = grad_target(in_ref);
            Tensor* gw = grad_target(w_ref);
            Tensor* gb = grad_target(b_ref);
            if (gb)
                for (int k = 0; k < K; ++k) gb->data[static_cast<std::size_t>(k)] += g.data[static_cast<std::size_t>(k)];
            for (int n2 = 0; n2 < N; ++n2) {
                const double x = in.data[static_cast<std::size_t>(n2)];
                const double* wrow = &w.data[static_cast<std::size_t>(n2) * K];
                double acc = 0.0;
                for (int k = 0; k < K; ++k) {
                    const double gk = g.data[static_cast<std::size_t>(k)];
                    if (gw && x != 0.0) gw->data[static_cast<std::size_t>(n2) * K + k] += x * gk;
                    acc += gk * wrow[k];
                }
                if (gin) gin->data[static_cast<std::size_t>(n2)] += acc;
            }
        };
        return r;
    }

    // Dense layer over a sparse count vector; items are (feature index,
    // count) pairs. Used by the n-gram baselines.
    Ref sparse_dense(const std::vector<std::pair<int, int>>& items, Ref w_ref, Ref b_ref) {
        const Tensor& w = value(w_ref);
        const Tensor& b = value(b_ref);
        if (w.shape.size() != 2 || b.shape.size() != 1)
            throw DataError("sparse_dense: expected weight (F,K), bias (K)");
        const int F = w.shape[0], K = w.shape[1];
        if (b.shape[0] != K) throw DataError("sparse_dense: bias length does not match weight cols");
        Tensor out({K});
        for (int k = 0; k < K; ++k) out.data[static_cast<std::size_t>(k)] = b.data[static_cast<std::size_t>(k)];
        for (const auto& [idx, cnt] : items) {
            if (idx < 0 || idx >= F) throw DataError("sparse_dense: feature index out of range");
            const double* wrow = &w.data[static_cast<std::size_t>(idx) * K];
            for (int k = 0; k < K; ++k) out.data[static_cast<std::size_t>(k)] += static_cast<double>(cnt) * wrow[k];
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        auto saved = std::make_shared<std::vector<std::pair<int, int>>>(items);
        node(r).back = [this, r, w_ref, b_ref, saved, K]() {
            const Tensor& g = node(r).grad;
            Tensor* gw = grad_target(w_ref);
            Tensor* gb = grad_target(b_ref);
            if (gb)
                for (int k = 0; k < K; ++k) gb->data[static_cast<std::size_t>(k)] += g.data[static_cast<std::size_t>(k)];
            if (gw)
                for (const auto& [idx, cnt] : *saved)
                    for (int k = 0; k < K; ++k)
                        gw->data[static_cast<std::size_t>(idx) * K + k] +=
                            static_cast<double>(cnt) * g.data[static_cast<std::size_t>(k)];
        };
        return r;
    }

    // Row gather from an embedding table parameter; (ids.size(), D) output.
    // Gradients flow into the table only when it is trainable, and never
    // into the <pad> row.
    Ref embedding(const std::vector<int>& ids, const std::string& table_name) {
        if (!store_) throw DataError("tape: no parameter store bound");
        ParamEntry& table = store_->entry(table_name);
        if (table.value.shape.size() != 2) throw DataError("embedding: table must be (V,D)");
        const int V = table.value.shape[0], D = table.value.shape[1];
        Tensor out({static_cast<int>(ids.size()), D});
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const int id = ids[i];
            if (id < 0 || id >= V) throw DataError("embedding: id out of range");
            const double* row = &table.value.data[static_cast<std::size_t>(id) * D];
            double* orow = &out.data[i * static_cast<std::size_t>(D)];
            for (int d = 0; d < D; ++d) orow[d] = row[d];
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        auto saved = std::make_shared<std::vector<int>>(ids);
        node(r).back = [this, r, &table, saved, D]() {
            if (!table.trainable) return;
            const Tensor& g = node(r).grad;
            for (std::size_t i = 0; i < saved->size(); ++i) {
                const int id = (*saved)[i];
                if (id == 0) continue;  // <pad> row stays zero
                double* grow = &table.grad.data[static_cast<std::size_t>(id) * D];
                const double* srow = &g.data[i * static_cast<std::size_t>(D)];
                for (int d = 0; d < D; ++d) grow[d] += srow[d];
            }
        };
        return r;
    }

    Ref relu(Ref in_ref) {
        const Tensor& in = value(in_ref);
        Tensor out = in;
        for (double& x : out.data)
            if (x < 0.0) x = 0.0;
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref]() {
            Tensor* gin = grad_target(in_ref);
            if (!gin) return;
            const Tensor& g = node(r).grad;
            const Tensor& in = value(in_ref);
            for (std::size_t i = 0; i < g.data.size(); ++i)
                if (in.data[i] > 0.0) gin->data[i] += g.data[i];
        };
        return r;
    }

    // Inverted dropout: train mode zeroes units with probability `rate` and
    // scales survivors by 1/(1-rate); infer mode is the identity and does
    // not consume randomness.
    Ref dropout(Ref in_ref, double rate, Mode mode, Rng& rng) {
        if (rate < 0.0 || rate >= 1.0) throw DataError("dropout: rate must be in [0,1)");
        const Tensor& in = value(in_ref);
        if (mode == Mode::infer || rate == 0.0) {
            Node n;
            n.owned = in;
            const Ref r = push(std::move(n));
            node(r).back = [this, r, in_ref]() {
                Tensor* gin = grad_target(in_ref);
                if (!gin) return;
                const Tensor& g = node(r).grad;
                for (std::size_t i = 0; i < g.data.size(); ++i) gin->data[i] += g.data[i];
            };
            return r;
        }
        const double scale = 1.0 / (1.0 - rate);
        auto mask = std::make_shared<std::vector<double>>(in.data.size());
        Tensor out = in;
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            const double keep = rng.next_unit() >= rate ? scale : 0.0;
            (*mask)[i] = keep;
            out.data[i] *= keep;
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref, mask]() {
            Tensor* gin = grad_target(in_ref);
            if (!gin) return;
            const Tensor& g = node(r).grad;
            for (std::size_t i = 0; i < g.data.size(); ++i) gin->data[i] += g.data[i] * (*mask)[i];
        };
        return r;
    }

    // Concatenate 1-D vectors.
    Ref concat(const std::vector<Ref>& parts) {
        if (parts.empty()) throw DataError("concat: nothing to concatenate");
        long long total = 0;
        for (Ref p : parts) total += value(p).numel();
        Tensor out({static_cast<int>(total)});
        std::size_t off = 0;
        for (Ref p : parts) {
            const Tensor& t = value(p);
            std::copy(t.data.begin(), t.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(off));
            off += t.data.size();
        }
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        auto saved = std::make_shared<std::vector<Ref>>(parts);
        node(r).back = [this, r, saved]() {
            const Tensor& g = node(r).grad;
            std::size_t off = 0;
            for (Ref p : *saved) {
                Tensor* gp = grad_target(p);
                const std::size_t len = value(p).data.size();
                if (gp)
                    for (std::size_t i = 0; i < len; ++i) gp->data[i] += g.data[off + i];
                off += len;
            }
        };
        return r;
    }

    Ref flatten(Ref in_ref) {
        const Tensor& in = value(in_ref);
        Tensor out({static_cast<int>(in.numel())}, in.data);
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref]() {
            Tensor* gin = grad_target(in_ref);
            if (!gin) return;
            const Tensor& g = node(r).grad;
            for (std::size_t i = 0; i < g.data.size(); ++i) gin->data[i] += g.data[i];
        };
        return r;
    }

    // Mean over rows of an (n,D) tensor. Bag-of-words averaging.
    Ref mean_rows(Ref in_ref) {
        const Tensor& in = value(in_ref);
        if (in.shape.size() != 2 || in.shape[0] < 1) throw DataError("mean_rows: expected nonempty (n,D) input");
        const int N = in.shape[0], D = in.shape[1];
        Tensor out({D});
        for (int i = 0; i < N; ++i)
            for (int d = 0; d < D; ++d) out.data[static_cast<std::size_t>(d)] += in.at(i, d);
        for (int d = 0; d < D; ++d) out.data[static_cast<std::size_t>(d)] /= static_cast<double>(N);
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref, N, D]() {
            Tensor* gin = grad_target(in_ref);
            if (!gin) return;
            const Tensor& g = node(r).grad;
            for (int i = 0; i < N; ++i)
                for (int d = 0; d < D; ++d) gin->at(i, d) += g.data[static_cast<std::size_t>(d)] / static_cast<double>(N);
        };
        return r;
    }

    Ref scale(Ref in_ref, double factor) {
        Tensor out = value(in_ref);
        for (double& x : out.data) x *= factor;
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, in_ref, factor]() {
            Tensor* gin = grad_target(in_ref);
            if (!gin) return;
            const Tensor& g = node(r).grad;
            for (std::size_t i = 0; i < g.data.size(); ++i) gin->data[i] += factor * g.data[i];
        };
        return r;
    }

    static std::vector<double> softmax(const std::vector<double>& logits) {
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : logits) mx = std::max(mx, v);
        std::vector<double> p(logits.size());
        double z = 0.0;
        for (std::size_t i = 0; i < logits.size(); ++i) {
            p[i] = std::exp(logits[i] - mx);
            z += p[i];
        }
        for (double& v : p) v /= z;
        return p;
    }

    // Cross-entropy with max-subtracted softmax; returns the scalar loss
    // node -log p[gold].
    Ref softmax_xent(Ref logits_ref, int gold) {
        const Tensor& logits = value(logits_ref);
        const int C = static_cast<int>(logits.numel());
        if (C < 2) throw DataError("softmax_xent: need at least two classes");
        if (gold < 0 || gold >= C) throw DataError("softmax_xent: gold index out of range");
        auto probs = std::make_shared<std::vector<double>>(softmax(logits.data));
        Tensor out({1});
        out.data[0] = -std::log((*probs)[static_cast<std::size_t>(gold)]);
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, logits_ref, probs, gold, C]() {
            Tensor* gl = grad_target(logits_ref);
            if (!gl) return;
            const double gs = node(r).grad.data[0];
            for (int c = 0; c < C; ++c)
                gl->data[static_cast<std::size_t>(c)] += gs * ((*probs)[static_cast<std::size_t>(c)] - (c == gold ? 1.0 : 0.0));
        };
        return r;
    }

    // One-vs-rest squared hinge over class scores: sum_c max(0, 1-y_c s_c)^2
    // with y_c = +1 for the gold class and -1 otherwise.
    Ref squared_hinge_ovr(Ref scores_ref, int gold) {
        const Tensor& s = value(scores_ref);
        const int C = static_cast<int>(s.numel());
        if (C < 2) throw DataError("squared_hinge_ovr: need at least two classes");
        if (gold < 0 || gold >= C) throw DataError("squared_hinge_ovr: gold index out of range");
        auto margins = std::make_shared<std::vector<double>>(static_cast<std::size_t>(C));
        double loss = 0.0;
        for (int c = 0; c < C; ++c) {
            const double y = c == gold ? 1.0 : -1.0;
            const double m = 1.0 - y * s.data[static_cast<std::size_t>(c)];
            (*margins)[static_cast<std::size_t>(c)] = m > 0.0 ? m : 0.0;
            if (m > 0.0) loss += m * m;
        }
        Tensor out({1});
        out.data[0] = loss;
        Node n;
        n.owned = std::move(out);
        const Ref r = push(std::move(n));
        node(r).back = [this, r, scores_ref, margins, gold, C]() {
            Tensor* gs = grad_target(scores_ref);
            if (!gs) return;
            const double g = node(r).grad.data[0];
            for (int c = 0; c < C; ++c) {
                const double m = (*margins)[static_cast<std::size_t>(c)];
                if (m <= 0.0) continue;
                const double y = c == gold ? 1.0 : -1.0;
                gs->data[static_cast<std::size_t>(c)] += g * (-2.0 * y * m);
            }
        };
        return r;
    }

    // Seed is the upstream gradient of the scalar loss (1/batch for means).
    void backward(Ref loss_ref, double seed = 1.0) {
        if (loss_ref < 0 || loss_ref >= static_cast<Ref>(nodes_.size()))
            throw NumericError("backward: no recorded forward pass for this node");
        if (value(loss_ref).numel() != 1) throw NumericError("backward: loss must be scalar");
        node(loss_ref).grad.data[0] = seed;
        for (Ref r = loss_ref; r >= 0; --r)
            if (node(r).back) node(r).back();
        if (store_) store_->note_grads_populated();
    }

  private:
    struct Node {
        Tensor owned;  // unused for parameter leaves, which read the store
        Tensor grad;
        ParamEntry* param = nullptr;
        std::function<void()> back;
    };

    Ref push(Node n) {
        if (!n.param) n.grad = Tensor(n.owned.shape);
#ifdef ALD_CHECK_FINITE
        if (!(n.param ? n.param->value : n.owned).all_finite())
            throw NumericError("tape: non-finite value produced");
#endif
        nodes_.push_back(std::move(n));
        return static_cast<Ref>(nodes_.size() - 1);
    }

    Node& node(Ref r) { return nodes_[static_cast<std::size_t>(r)]; }
    const Node& node(Ref r) const { return nodes_[static_cast<std::size_t>(r)]; }

    // Where a node's gradient accumulates: its own buffer, the parameter
    // store for trainable leaves, or nowhere (frozen parameters and plain
    // input leaves, which nothing differentiates through).
    Tensor* grad_target(Ref r) {
        Node& n = node(r);
        if (n.param) return n.param->trainable ? &n.param->grad : nullptr;
        if (!n.back) return nullptr;
        return &n.grad;
    }

    std::deque<Node> nodes_;  // reference-stable: values may be held across later pushes
    ParamStore* store_;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    int worst_index = -1;
    int coords_checked = 0;
};

// Central-difference check of a scalar loss closure against the gradients
// it populates. loss_fn(true) must run forward+backward into `store`;
// loss_fn(false) must be a pure forward pass. The closure has to be
// deterministic (reseed any dropout internally). Relative error uses
// max(1, |analytic|, |numeric|) as denominator so dead coordinates do not
// drown the report in finite-difference noise.
inline GradCheckReport grad_check(const std::function<double(bool)>& loss_fn, ParamStore& store, double eps,
                                  int samples_per_tensor, std::uint64_t seed, bool corrupt_sign = false) {
    if (eps <= 0.0) throw DataError("grad_check: eps must be positive");
    store.zero_grads();
    loss_fn(true);
    if (!store.grads_populated()) throw NumericError("grad_check: closure did not populate gradients");
    std::map<std::string, Tensor> analytic;
    for (const auto& [name, e] : store.entries()) analytic[name] = e.grad;
    if (corrupt_sign)
        for (auto& [name, g] : analytic)
            for (double& x : g.data) x = -x;

    GradCheckReport report;
    Rng rng(derive_seed(seed, 0x9cad));
    for (auto& [name, e] : store.entries()) {
        if (!e.trainable) continue;
        const long long numel = e.value.numel();
        std::vector<long long> coords;
        if (numel <= samples_per_tensor) {
            for (long long i = 0; i < numel; ++i) coords.push_back(i);
        } else {
            std::set<long long> picked;
            while (static_cast<int>(picked.size()) < samples_per_tensor)
                picked.insert(static_cast<long long>(rng.next_below(static_cast<std::size_t>(numel))));
            coords.assign(picked.begin(), picked.end());
        }
        for (long long i : coords) {
            const double original = e.value.data[static_cast<std::size_t>(i)];
            e.value.data[static_cast<std::size_t>(i)] = original + eps;
            const double up = loss_fn(false);
            e.value.data[static_cast<std::size_t>(i)] = original - eps;
            const double down = loss_fn(false);
            e.value.data[static_cast<std::size_t>(i)] = original;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[name].data[static_cast<std::size_t>(i)];
            const double denom = std::max({1.0, std::fabs(a), std::fabs(numeric)});
            const double rel = std::fabs(a - numeric) / denom;
            ++report.coords_checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = name;
                report.worst_index = static_cast<int>(i);
            }
        }
    }
    store.zero_grads();
    return report;
}

}  // namespace ald
