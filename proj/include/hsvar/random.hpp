#pragma once

#include <cstdint>
#include <random>

namespace hsvar {

/// Seeded random stream used by every sampler. Wraps a 64-bit Mersenne
/// twister together with a persistent normal generator so that a given
/// seed always reproduces the same sequence of draws.
class Random {
public:
    explicit Random(std::uint64_t seed);

    /// Independent stream derived from (seed, stream id).
    static Random substream(std::uint64_t seed, std::uint64_t stream);

    double uniform();        // open interval (0, 1)
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double gamma(double shape, double rate);
    double inverse_gamma(double shape, double scale);
    double beta(double a, double b);
    double exponential(double rate);
    double inverse_gaussian(double mean, double shape);
    double half_cauchy(double scale);
    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; used to derive substream seeds.
std::uint64_t mix_seed(std::uint64_t x);

} // namespace hsvar
