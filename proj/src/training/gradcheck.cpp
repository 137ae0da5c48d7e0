#include "lordd/training/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "lordd/error.hpp"
#include "lordd/rng.hpp"

namespace lordd::training {

GradCheckResult gradcheck(const Differentiable& fn, const VectorD& x, const GradCheckOptions& opts) {
    if (!(opts.eps > 0.0)) throw ArgumentError("gradcheck: eps must be positive");
    const VectorD analytic = fn.gradient(x);
    if (analytic.size() != x.size()) throw ArgumentError("gradcheck: gradient has the wrong size");
    if (!analytic.allFinite()) throw NumericError("gradcheck: analytic gradient is not finite");

    const auto n = static_cast<std::size_t>(x.size());
    std::vector<std::size_t> coords;
    if (n <= opts.max_coords) {
        for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
        Rng rng(opts.seed);
        coords = rng.sample_indices(n, opts.max_coords);
        std::sort(coords.begin(), coords.end());
    }

    GradCheckResult r;
    VectorD probe = x;
    for (std::size_t c : coords) {
        const auto i = static_cast<Eigen::Index>(c);
        if (fn.smooth_at && !fn.smooth_at(x, i, opts.eps)) {
            ++r.skipped;
            continue;
        }
        probe(i) = x(i) + opts.eps;
        const double hi = fn.value(probe);
        probe(i) = x(i) - opts.eps;
        const double lo = fn.value(probe);
        probe(i) = x(i);
        if (!std::isfinite(hi) || !std::isfinite(lo)) throw NumericError("gradcheck: loss is not finite");
        const double numeric = (hi - lo) / (2.0 * opts.eps);
        const double a = analytic(i);
        const double denom = std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
        r.max_rel_error = std::max(r.max_rel_error, std::abs(a - numeric) / denom);
        ++r.checked;
    }
    return r;
}

}  // namespace lordd::training
