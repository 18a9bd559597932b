#pragma once

#include <functional>
#include <span>
#include <vector>

#include "titan/nn/params.hpp"

namespace titan::nn {

// Define-by-run reverse-mode tape over double vectors.  Each op records a
// value node and a backward closure; backward() walks nodes in reverse
// creation order, which is a valid topological order by construction.
// Parameters are not tape nodes: ops that consume them accumulate straight
// into Param::grad, so one tape can be built and discarded per sample while
// gradients aggregate across a batch.
class Tape {
 public:
  using Id = int;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Id leaf(std::span<const double> v);
  Id leaf(std::initializer_list<double> v);
  Id zeros(int n);

  // Copies the param's current value; backward adds into p.grad.
  Id param(Param& p);

  Id affine(Linear& lin, Id x);
  Id relu(Id x);
  Id tanh(Id x);
  Id sigmoid(Id x);
  Id exp(Id x);

  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);             // elementwise
  Id scale(Id x, double c);
  Id add_const(Id x, double c);
  Id concat(std::span<const Id> parts);
  Id concat(std::initializer_list<Id> parts);
  Id slice(Id x, int offset, int len);

  Id sum(Id x);                                // 1-dim
  Id mean_stack(std::span<const Id> xs);       // elementwise mean of same-shape nodes
  Id sum_stack(std::span<const Id> xs);
  Id broadcast_mul(Id s, Id x);                // s is 1-dim, scales every element

  // h' for one GRU step; x, h, and the result are hidden-width vectors.
  Id gru_step(GruParams& p, Id x, Id h);

  // Scalar cross entropy of softmax(logits) against a class index.
  Id softmax_cross_entropy(Id logits, int target);

  // Scalar negative log density of a bivariate Gaussian at (x, y).
  // p5 = [mu_x, mu_y, sigma_x, sigma_y, rho]; requires sigma > 0, |rho| < 1.
  Id bivariate_nll(Id p5, double x, double y);

  const std::vector<double>& val(Id id) const { return nodes_[id].val; }
  const std::vector<double>& grad_of(Id id) const { return nodes_[id].grad; }
  int dim(Id id) const { return static_cast<int>(nodes_[id].val.size()); }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)=1 and propagates; root must be scalar.
  void backward(Id root);

 private:
  struct Node {
    std::vector<double> val;
    std::vector<double> grad;
    std::function<void(Tape&, Id self)> back;
  };

  Id push(std::vector<double> val, std::function<void(Tape&, Id)> back);
  std::vector<double>& mutable_grad(Id id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

}  // namespace titan::nn
