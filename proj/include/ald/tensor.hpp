#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "ald/error.hpp"
#include "ald/hash.hpp"

namespace ald {

// Dense row-major tensor of doubles. All training and inference in this
// library runs at 64-bit; the acceptance and determinism guarantees depend
// on that.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), 0.0);
    }

    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<long long>(data.size()) != numel_of(shape))
            throw DataError("tensor: data length does not match shape");
    }

    static long long numel_of(const std::vector<int>& s) {
        long long n = 1;
        for (int e : s) {
            if (e < 0) throw DataError("tensor: negative extent");
            n *= e;
        }
        return n;
    }

    long long numel() const { return static_cast<long long>(data.size()); }

    // 2-D helpers; most intermediate values here are (time x channels).
    int rows() const { return shape.empty() ? 0 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(int i) { return data[static_cast<std::size_t>(i)]; }
    double at(int i) const { return data[static_cast<std::size_t>(i)]; }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

    void fill(double v) {
        for (double& x : data) x = v;
    }

    bool all_finite() const {
        for (double x : data)
            if (!std::isfinite(x)) return false;
        return true;
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    double squared_norm() const {
        double s = 0.0;
        for (double x : data) s += x * x;
        return s;
    }

    std::uint64_t content_hash() const {
        Fnv64 h;
        for (int e : shape) h.update_u64(static_cast<std::uint64_t>(e));
        for (double x : data) h.update_f64(x);
        return h.digest();
    }
};

}  // namespace ald
