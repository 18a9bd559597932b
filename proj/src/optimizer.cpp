#include "titan/nn/optimizer.hpp"

#include "titan/kernels/kernels.hpp"

namespace titan::nn {

void RmsProp::step(ParamStore& params) const {
  for (Param* p : params.items())
    kernels::rmsprop_update(p->value.data(), p->grad.data(), p->ms.data(),
                            p->size(), lr, alpha, eps);
}

}  // namespace titan::nn
