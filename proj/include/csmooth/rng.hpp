#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace csmooth {

// All randomness in the project flows through this wrapper. The raw engine is
// mt19937_64, but uniform/normal/bernoulli draws are implemented here instead
// of via std::*_distribution so that a given seed produces the same stream on
// every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, two uniforms per draw, no cached spare.
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
    std::size_t below(std::size_t n) {
        if (n == 0) throw std::out_of_range("Rng::below: n must be positive");
        return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        shuffle(idx);
        return idx;
    }

    std::vector<std::size_t> sample_with_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(k);
        for (auto& i : idx) i = below(n);
        return idx;
    }

    // Sorted k-subset of [0, n). Sorting keeps downstream summation order
    // canonical, so a full subset reproduces the original estimate exactly.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx = permutation(n);
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    std::mt19937_64 gen_;
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_offset) {
    return master + stream_offset;
}

}  // namespace csmooth
