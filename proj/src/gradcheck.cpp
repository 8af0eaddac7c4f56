#include "gadnr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gadnr/errors.hpp"

namespace gadnr {

namespace {

double evaluate(const std::function<ad::Val(ad::Tape&)>& build_loss) {
  ad::Tape tape;
  const ad::Val loss = build_loss(tape);
  return tape.scalar(loss);
}

}  // namespace

double grad_check(const std::function<ad::Val(ad::Tape&)>& build_loss,
                  const std::vector<ad::DTensor*>& params, double eps) {
  const double base_a = evaluate(build_loss);
  const double base_b = evaluate(build_loss);
  if (base_a != base_b)
    throw NumericError("grad_check: loss builder is not deterministic");

  for (ad::DTensor* p : params) p->zero_grad();
  {
    ad::Tape tape;
    const ad::Val loss = build_loss(tape);
    tape.backward(loss);
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const ad::DTensor* p : params) analytic.push_back(p->grad);

  double max_rel = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = params[i]->value;
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double saved = value.data[j];
      value.data[j] = saved + eps;
      const double f_plus = evaluate(build_loss);
      value.data[j] = saved - eps;
      const double f_minus = evaluate(build_loss);
      value.data[j] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[i].data[j];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::fabs(a - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace gadnr
