#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "titan/core/rng.hpp"

namespace titan::nn {

// A named dense parameter block.  Matrices are row-major [rows x cols];
// vectors use cols == 1.  grad and ms (optimizer state) share the layout.
struct Param {
  std::string name;
  int rows = 0;
  int cols = 1;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> ms;

  int size() const { return rows * cols; }

  void resize(std::string param_name, int r, int c) {
    name = std::move(param_name);
    rows = r;
    cols = c;
    value.assign(static_cast<size_t>(r) * c, 0.0);
    grad.assign(value.size(), 0.0);
    ms.assign(value.size(), 0.0);
  }

  void fill_uniform(core::Rng& rng, double lo, double hi) {
    for (double& v : value) v = rng.uniform(lo, hi);
  }
};

// y = W x + b.
struct Linear {
  Param w;
  Param b;

  void init(const std::string& name, int out_dim, int in_dim, core::Rng& rng);
  int in_dim() const { return w.cols; }
  int out_dim() const { return w.rows; }
};

// Fused gate parameters for one GRU cell.  ih: input -> 3H, hh: hidden -> 3H,
// gate order [reset, update, candidate]; the step itself lives on the tape.
struct GruParams {
  Linear ih;
  Linear hh;
  int hidden = 0;

  void init(const std::string& name, int in_dim, int hidden_dim, core::Rng& rng);
};

// Non-owning registry over a model's Param blocks; defines the canonical
// ordering used by the optimizer and the checkpoint format.
class ParamStore {
 public:
  void add(Param& p);
  void add(Linear& lin);
  void add(GruParams& gru);

  const std::vector<Param*>& items() const { return items_; }
  std::size_t total_size() const;
  void zero_grads();

 private:
  std::vector<Param*> items_;
};

}  // namespace titan::nn
