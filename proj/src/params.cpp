#include "titan/nn/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace titan::nn {

void Linear::init(const std::string& name, int out_dim, int in_dim, core::Rng& rng) {
  w.resize(name + ".w", out_dim, in_dim);
  b.resize(name + ".b", out_dim, 1);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  w.fill_uniform(rng, -bound, bound);
  b.fill_uniform(rng, -bound, bound);
}

void GruParams::init(const std::string& name, int in_dim, int hidden_dim, core::Rng& rng) {
  hidden = hidden_dim;
  ih.init(name + ".ih", 3 * hidden_dim, in_dim, rng);
  hh.init(name + ".hh", 3 * hidden_dim, hidden_dim, rng);
  // Both gate stacks scale with the hidden fan-in.
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  ih.w.fill_uniform(rng, -bound, bound);
  ih.b.fill_uniform(rng, -bound, bound);
  hh.w.fill_uniform(rng, -bound, bound);
  hh.b.fill_uniform(rng, -bound, bound);
}

void ParamStore::add(Param& p) {
  if (p.size() == 0) throw std::logic_error("registering unsized param: " + p.name);
  for (const Param* q : items_)
    if (q->name == p.name) throw std::logic_error("duplicate param name: " + p.name);
  items_.push_back(&p);
}

void ParamStore::add(Linear& lin) {
  add(lin.w);
  add(lin.b);
}

void ParamStore::add(GruParams& gru) {
  add(gru.ih);
  add(gru.hh);
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const Param* p : items_) n += static_cast<std::size_t>(p->size());
  return n;
}

void ParamStore::zero_grads() {
  for (Param* p : items_)
    std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

}  // namespace titan::nn
