#pragma once

#include <functional>
#include <vector>

#include "wsg/matrix.hpp"

namespace wsg {

/// Central finite-difference comparison against analytic gradients.
///
/// `f` evaluates the scalar loss at the given parameter values; it must be
/// deterministic. Returns the max over all coordinates of
///   |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double finite_diff_check(
    const std::function<double(const std::vector<Matrix>&)>& f,
    std::vector<Matrix> params, const std::vector<Matrix>& analytic,
    double eps);

}  // namespace wsg
