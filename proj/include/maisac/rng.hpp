#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace maisac {

/// Deterministic random stream. Wraps std::mt19937_64 with explicit
/// uniform/Gaussian conversions so that identical seeds reproduce the
/// same draws on every standard library implementation
/// (std::normal_distribution is implementation-defined, Box-Muller is not).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal pair via Box-Muller.
    void gaussian_pair(double& z0, double& z1) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        z0 = r * std::cos(t);
        z1 = r * std::sin(t);
    }

    /// Circularly-symmetric complex Gaussian CN(0, variance).
    std::complex<double> complex_normal(double variance) {
        double z0, z1;
        gaussian_pair(z0, z1);
        const double s = std::sqrt(variance * 0.5);
        return {s * z0, s * z1};
    }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace maisac
