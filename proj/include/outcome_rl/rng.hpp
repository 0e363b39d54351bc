#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace outcome_rl {

/// Seeded random generator with fully pinned sampling routines.
///
/// All draws are derived from raw mt19937_64 output through fixed arithmetic
/// (no std::*_distribution), so identical seeds produce bitwise-identical
/// streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform double in [0, 1), 53 bits of precision.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        // rejection sampling keeps the draw unbiased
        const std::uint64_t bound = n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / bound * bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<int>(x % bound);
    }

    /// Standard normal via Box-Muller (one value per call).
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double exponential() { return -std::log(1.0 - uniform()); }

    /// Index drawn proportionally to the (nonnegative) weights.
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("categorical: weights must have positive sum");
        double u = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return static_cast<int>(i);
        }
        // numerical fall-through: last index with positive weight
        for (std::size_t i = weights.size(); i-- > 0;)
            if (weights[i] > 0.0) return static_cast<int>(i);
        return static_cast<int>(weights.size()) - 1;
    }

    /// Dirichlet(1,...,1) draw: uniform over the probability simplex.
    std::vector<double> simplex(int n) {
        std::vector<double> x(n);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] = exponential();
            total += x[i];
        }
        for (int i = 0; i < n; ++i) x[i] /= total;
        return x;
    }

    /// Uniform point on the unit sphere in R^d.
    std::vector<double> unit_vector(int d) {
        std::vector<double> v(d);
        double norm_sq = 0.0;
        do {
            norm_sq = 0.0;
            for (int i = 0; i < d; ++i) {
                v[i] = gaussian();
                norm_sq += v[i] * v[i];
            }
        } while (norm_sq == 0.0);
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (int i = 0; i < d; ++i) v[i] *= inv;
        return v;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace outcome_rl
