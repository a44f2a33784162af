#include "hsvar/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsvar {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Random::Random(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                      static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
}

Random Random::substream(std::uint64_t seed, std::uint64_t stream) {
    return Random(mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL)));
}

double Random::uniform() {
    double u;
    do {
        u = std::generate_canonical<double, 53>(engine_);
    } while (u <= 0.0 || u >= 1.0);
    return u;
}

double Random::normal() { return normal_(engine_); }

double Random::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
        throw std::domain_error("gamma: shape and rate must be positive and finite");
    }
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_) / rate;
}

double Random::inverse_gamma(double shape, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::domain_error("inverse_gamma: scale must be positive and finite");
    }
    return scale / gamma(shape, 1.0);
}

double Random::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
}

double Random::exponential(double rate) { return -std::log(uniform()) / rate; }

// Michael, Schucany & Haas (1976).
double Random::inverse_gaussian(double mean, double shape) {
    if (!(mean > 0.0) || !(shape > 0.0)) {
        throw std::domain_error("inverse_gaussian: mean and shape must be positive");
    }
    if (!std::isfinite(mean)) {
        // Limit as mean -> inf is the Levy distribution shape / chi^2_1.
        const double z = normal();
        return shape / (z * z);
    }
    const double z = normal();
    const double q = mean * z * z / (2.0 * shape);
    // mean * (1 + q - sqrt(q^2 + 2q)) without the cancellation
    // sqrt(q) * sqrt(q + 2) keeps huge means (tiny |theta| in the Laplace update) from overflowing
    const double x = mean / (1.0 + q + std::sqrt(q) * std::sqrt(q + 2.0));
    if (uniform() <= mean / (mean + x)) {
        return x;
    }
    return mean * mean / x;
}

double Random::half_cauchy(double scale) {
    return scale * std::abs(std::tan(std::numbers::pi * (uniform() - 0.5)));
}

} // namespace hsvar
