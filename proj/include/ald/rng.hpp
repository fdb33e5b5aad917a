#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace ald {

// splitmix64 generator. std::mt19937 + distributions are implementation
// defined, so a fixed seed would not give the same folds/batches on every
// platform; this one does.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // n must be > 0. Modulo bias is negligible for n << 2^64.
    std::size_t next_below(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % n);
    }

    // [0, 1), 53-bit resolution
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

// Independent stream for (seed, salt) pairs, e.g. per-fold seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed ^ (0x632be59bd9b4e019ULL * (salt + 1)));
    return r.next_u64();
}

}  // namespace ald
