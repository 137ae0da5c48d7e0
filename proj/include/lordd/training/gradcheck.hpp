#pragma once

#include <cstdint>
#include <functional>

#include "lordd/types.hpp"

namespace lordd::training {

// A scalar function of a parameter vector together with its analytic
// gradient. `smooth_at`, when set, says whether the function is
// differentiable over [x - eps e_i, x + eps e_i]; coordinates where it is
// not (hinge kinks) are skipped.
struct Differentiable {
    std::function<double(const VectorD&)> value;
    std::function<VectorD(const VectorD&)> gradient;
    std::function<bool(const VectorD& x, Eigen::Index coord, double eps)> smooth_at;
};

struct GradCheckOptions {
    double eps = 1e-4;
    std::size_t max_coords = 64;
    std::uint64_t seed = 0;
    double abs_floor = 1e-8;  // denominator floor for the relative error
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
};

// Central finite differences on up to max_coords sampled coordinates.
// Relative error per coordinate: |a - n| / max(|a|, |n|, abs_floor).
// Throws NumericError on non-finite values.
GradCheckResult gradcheck(const Differentiable& fn, const VectorD& x, const GradCheckOptions& opts = {});

}  // namespace lordd::training
