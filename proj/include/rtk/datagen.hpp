// Seeded generators for the benchmark input distributions.

#ifndef RTK_DATAGEN_HPP
#define RTK_DATAGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtk {

enum class DistKind { Uniform, Normal, Zipf, Peaked };

struct DistributionSpec {
    DistKind kind = DistKind::Uniform;
    double a = 0.0;       // Uniform lower / Normal mean
    double b = 1.0;       // Uniform upper / Normal stddev
    double s = 1.1;       // Zipf skewness
    double mass = 0.8;    // Peaked: probability mass on the modes
    unsigned modes = 1;   // Peaked: number of modes
    std::uint64_t seed = 0;
    std::size_t n = 0;

    void validate() const {
        if (n == 0) throw std::invalid_argument("distribution: n must be positive");
        switch (kind) {
            case DistKind::Uniform:
                if (!(a < b)) throw std::invalid_argument("uniform: requires a < b");
                break;
            case DistKind::Normal:
                if (!(b > 0)) throw std::invalid_argument("normal: requires sigma > 0");
                break;
            case DistKind::Zipf:
                if (!(s > 1.0)) throw std::invalid_argument("zipf: requires s > 1");
                break;
            case DistKind::Peaked:
                if (!(mass > 0.0 && mass < 1.0))
                    throw std::invalid_argument("peaked: mass must be in (0, 1)");
                if (modes == 0 || modes >= n)
                    throw std::invalid_argument("peaked: modes must be in [1, n)");
                break;
        }
    }
};

namespace detail {

// Zipf values are the normalized rank-law masses p_r = r^-s / H_n, shuffled
// by seed so input order carries no structure.
inline std::vector<float> zipf_masses(std::size_t n, double s) {
    std::vector<double> masses(n);
    double norm = 0.0;
    for (std::size_t r = 1; r <= n; ++r) {
        masses[r - 1] = std::pow(static_cast<double>(r), -s);
        norm += masses[r - 1];
    }
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(masses[i] / norm);
    return out;
}

}  // namespace detail

template <typename T>
std::vector<T> generate(const DistributionSpec& spec);

template <>
inline std::vector<float> generate<float>(const DistributionSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<float> out;
    out.reserve(spec.n);
    switch (spec.kind) {
        case DistKind::Uniform: {
            std::uniform_real_distribution<double> dist(spec.a, spec.b);
            for (std::size_t i = 0; i < spec.n; ++i) out.push_back(static_cast<float>(dist(rng)));
            break;
        }
        case DistKind::Normal: {
            std::normal_distribution<double> dist(spec.a, spec.b);
            for (std::size_t i = 0; i < spec.n; ++i) out.push_back(static_cast<float>(dist(rng)));
            break;
        }
        case DistKind::Zipf: {
            out = detail::zipf_masses(spec.n, spec.s);
            std::shuffle(out.begin(), out.end(), rng);
            break;
        }
        case DistKind::Peaked: {
            // m modes holding `mass` of the probability, the rest uniform in
            // a narrow band around the residual mean
            double mode_value = spec.mass / spec.modes;
            double residual = (1.0 - spec.mass) / static_cast<double>(spec.n - spec.modes);
            std::uniform_real_distribution<double> dist(residual * 0.5, residual * 1.5);
            for (std::size_t i = 0; i < spec.n; ++i) out.push_back(static_cast<float>(dist(rng)));
            for (unsigned m = 0; m < spec.modes; ++m)
                out[m] = static_cast<float>(mode_value);
            std::shuffle(out.begin(), out.end(), rng);
            break;
        }
    }
    return out;
}

template <>
inline std::vector<std::uint32_t> generate<std::uint32_t>(const DistributionSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<std::uint32_t> out;
    out.reserve(spec.n);
    switch (spec.kind) {
        case DistKind::Uniform: {
            for (std::size_t i = 0; i < spec.n; ++i)
                out.push_back(static_cast<std::uint32_t>(rng()));
            break;
        }
        case DistKind::Normal: {
            std::normal_distribution<double> dist(2147483648.0, 536870912.0);
            for (std::size_t i = 0; i < spec.n; ++i) {
                double v = std::clamp(dist(rng), 0.0, 4294967295.0);
                out.push_back(static_cast<std::uint32_t>(v));
            }
            break;
        }
        case DistKind::Zipf: {
            // rank-law masses quantized to 30-bit fixed point
            std::vector<float> masses = detail::zipf_masses(spec.n, spec.s);
            for (float m : masses)
                out.push_back(static_cast<std::uint32_t>(m * 1073741824.0f));
            std::shuffle(out.begin(), out.end(), rng);
            break;
        }
        case DistKind::Peaked:
            throw std::invalid_argument("peaked distribution is defined for f32 only");
    }
    return out;
}

}  // namespace rtk

#endif  // RTK_DATAGEN_HPP
