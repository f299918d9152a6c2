#pragma once

// Synthetic datasets with multiplicative Gaussian noise:
//   y = y_true * (1 + g),  g ~ N(0, relative_sigma),  dy = |y_true| * relative_sigma.
//
// Randomness is fully pinned so runs are reproducible from a seed alone:
// std::mt19937_64 (bit-exact by the C++ standard) drives uniforms via
// (x >> 11) * 2^-53, and normals come from the Marsaglia polar transform
// implemented here — never from std::normal_distribution, whose stream is
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "varpro/errors.hpp"
#include "varpro/fit.hpp"
#include "varpro/linalg.hpp"
#include "varpro/model.hpp"

namespace varpro {

class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal via the Marsaglia polar method; the second deviate of
    // each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double gauss(double mean, double sigma) { return mean + sigma * normal(); }

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct NoiseSpec {
    double relative_sigma = 0.0;  // fractional noise level, e.g. 0.01 for 1%
    std::uint64_t seed = 0;

    void validate() const {
        if (!(relative_sigma >= 0.0)) throw ConfigError("NoiseSpec: relative_sigma must be >= 0");
    }
};

struct GridSpec {
    double start = 0.0;
    double step = 0.0;
    std::size_t count = 0;

    void validate() const {
        if (count < 1) throw ConfigError("GridSpec: count must be >= 1");
        if (!(step > 0.0)) throw ConfigError("GridSpec: step must be > 0");
    }

    double point(std::size_t i) const { return start + static_cast<double>(i) * step; }
};

// One noisy point. With relative_sigma == 0 no deviate is drawn and y is the
// exact true value, but then dy_override (an absolute uncertainty) must be
// supplied since dy must stay positive.
inline DataPoint make_point(double x, double true_y, const NoiseSpec& spec, GaussianRng& rng,
                            std::optional<double> dy_override = std::nullopt) {
    spec.validate();
    if (dy_override && !(*dy_override > 0.0)) {
        throw ValueError("make_point: dy override must be > 0");
    }
    if (spec.relative_sigma == 0.0) {
        if (!dy_override) {
            throw ZeroUncertaintyError(
                "make_point: relative_sigma is 0 and no dy override was given");
        }
        return DataPoint(x, true_y, *dy_override);
    }
    const double y = true_y * (1.0 + rng.gauss(0.0, spec.relative_sigma));
    const double dy = dy_override ? *dy_override : std::abs(true_y) * spec.relative_sigma;
    return DataPoint(x, y, dy);
}

// Dataset on the grid x_i = start + i*step with true values from the given
// separable truth. dy_rel_override, when set, fixes dy = dy_rel * |y_true|
// per point regardless of the noise level (the zero-noise path needs it).
inline Dataset generate_experiment(const ModelBasis& truth, const Vector& a_true,
                                   const Vector& b_true, const GridSpec& grid,
                                   const NoiseSpec& spec,
                                   std::optional<double> dy_rel_override = std::nullopt) {
    grid.validate();
    spec.validate();
    if (dy_rel_override && !(*dy_rel_override > 0.0)) {
        throw ConfigError("generate_experiment: dy_rel override must be > 0");
    }
    GaussianRng rng(spec.seed);
    std::vector<DataPoint> pts;
    pts.reserve(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double x = grid.point(i);
        const double ty = truth.model_value(a_true, b_true, x);
        std::optional<double> dy_abs;
        if (dy_rel_override) dy_abs = *dy_rel_override * std::abs(ty);
        pts.push_back(make_point(x, ty, spec, rng, dy_abs));
    }
    return Dataset(std::move(pts));
}

}  // namespace varpro
