#pragma once
#include <functional>
#include <vector>

#include "gadnr/tape.hpp"

namespace gadnr {

// Compares backward() gradients against central finite differences
// (f(p+eps) - f(p-eps)) / (2 eps) entrywise and returns the maximum
// relative error with denominator max(|analytic|, |numeric|, 1e-8).
// The loss builder must be deterministic: two identical evaluations that
// disagree raise NumericError.
double grad_check(const std::function<ad::Val(ad::Tape&)>& build_loss,
                  const std::vector<ad::DTensor*>& params, double eps);

}  // namespace gadnr
