#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "titan/nn/params.hpp"

namespace titan::test {

// Central-difference gradient check over every registered parameter
// coordinate (or a strided subset for large blocks).  loss() must rebuild the
// computation from scratch on each call.  Returns the worst relative error
// max(|analytic - fd| / max(1e-3, |analytic| + |fd|)); the denominator floor
// keeps coordinates whose gradient sits at the finite-difference noise floor
// (about eps*|loss|/h) from reading as spurious mismatches.
inline double max_grad_rel_error(nn::ParamStore& params,
                                 const std::function<double()>& loss,
                                 const std::function<void()>& compute_grads,
                                 double h = 1e-5, int max_coords_per_param = 64) {
  params.zero_grads();
  compute_grads();
  std::vector<std::vector<double>> analytic;
  for (nn::Param* p : params.items()) analytic.push_back(p->grad);

  double worst = 0.0;
  for (size_t pi = 0; pi < params.items().size(); ++pi) {
    nn::Param* p = params.items()[pi];
    const int n = p->size();
    const int stride = n <= max_coords_per_param ? 1 : n / max_coords_per_param;
    for (int i = 0; i < n; i += stride) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss();
      p->value[i] = saved - h;
      const double down = loss();
      p->value[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = analytic[pi][i];
      const double denom = std::max(1e-3, std::abs(an) + std::abs(fd));
      worst = std::max(worst, std::abs(an - fd) / denom);
    }
  }
  return worst;
}

}  // namespace titan::test
