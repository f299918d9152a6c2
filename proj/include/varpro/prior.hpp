#pragma once

// Gaussian priors on the nonlinear parameters: a quadratic penalty
// sum_i ((b_i - center_i)/width_i)^2 added to the chi^2 to stabilize fits,
// plus the two-sigma retention filter used by ensemble summaries.

#include <cmath>
#include <cstddef>
#include <utility>

#include "varpro/errors.hpp"
#include "varpro/linalg.hpp"

namespace varpro {

class GaussianPrior {
  public:
    GaussianPrior(Vector center, Vector width)
        : center_(std::move(center)), width_(std::move(width)) {
        if (center_.size() != width_.size()) {
            throw LengthError("GaussianPrior: center and width lengths differ");
        }
        for (std::size_t i = 0; i < width_.size(); ++i) {
            if (!(width_[i] > 0.0)) throw ValueError("GaussianPrior: widths must be > 0");
        }
    }

    std::size_t size() const noexcept { return center_.size(); }
    const Vector& center() const noexcept { return center_; }
    const Vector& width() const noexcept { return width_; }

    double penalty(const Vector& b) const {
        check_length(b);
        double s = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double z = (b[i] - center_[i]) / width_[i];
            s += z * z;
        }
        return s;
    }

    // Retention filter: true iff every component is within two widths of its
    // center, boundary inclusive. False means the result is discarded from
    // ensemble summaries.
    bool within_two_sigma(const Vector& b) const {
        check_length(b);
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (std::abs(b[i] - center_[i]) > 2.0 * width_[i]) return false;
        }
        return true;
    }

  private:
    void check_length(const Vector& b) const {
        if (b.size() != center_.size()) {
            throw LengthError("GaussianPrior: b length does not match the prior");
        }
    }

    Vector center_, width_;
};

}  // namespace varpro
