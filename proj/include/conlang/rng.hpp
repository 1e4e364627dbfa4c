#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace conlang {

/// Seedable random source. The engine sequence of std::mt19937_64 is fixed by
/// the standard; the std distributions are not, so the conversions to doubles
/// and weighted picks are done here to keep output identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Index drawn proportionally to `weights` (all > 0, non-empty).
    size_t pick(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double x = uniform() * total;
        for (size_t i = 0; i < weights.size(); ++i) {
            if (x < weights[i]) return i;
            x -= weights[i];
        }
        return weights.size() - 1;
    }

    /// Uniform integer in [0, n).
    size_t below(size_t n) { return static_cast<size_t>(uniform() * static_cast<double>(n)); }

private:
    std::mt19937_64 engine_;
};

}  // namespace conlang
