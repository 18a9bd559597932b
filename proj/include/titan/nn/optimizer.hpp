#pragma once

#include "titan/nn/params.hpp"

namespace titan::nn {

// RMSProp with the usual squared-gradient moving average:
//   ms = alpha*ms + (1-alpha)*g^2;  w -= lr*g / (sqrt(ms) + eps)
struct RmsProp {
  double lr = 1e-4;
  double alpha = 0.99;
  double eps = 1e-8;

  void step(ParamStore& params) const;
};

}  // namespace titan::nn
