#include "titan/nn/tape.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "titan/kernels/kernels.hpp"

namespace titan::nn {

namespace ker = titan::kernels;

Tape::Id Tape::push(std::vector<double> val, std::function<void(Tape&, Id)> back) {
  nodes_.push_back(Node{std::move(val), {}, std::move(back)});
  Node& n = nodes_.back();
  n.grad.assign(n.val.size(), 0.0);
  return static_cast<Id>(nodes_.size() - 1);
}

Tape::Id Tape::leaf(std::span<const double> v) {
  return push(std::vector<double>(v.begin(), v.end()), {});
}

Tape::Id Tape::leaf(std::initializer_list<double> v) {
  return push(std::vector<double>(v), {});
}

Tape::Id Tape::zeros(int n) { return push(std::vector<double>(n, 0.0), {}); }

Tape::Id Tape::param(Param& p) {
  Param* pp = &p;
  return push(p.value, [pp](Tape& t, Id self) {
    const auto& g = t.nodes_[self].grad;
    ker::axpy(1.0, g.data(), pp->grad.data(), static_cast<int>(g.size()));
  });
}

Tape::Id Tape::affine(Linear& lin, Id x) {
  if (dim(x) != lin.in_dim())
    throw std::logic_error("affine input width mismatch for " + lin.w.name);
  std::vector<double> y(lin.out_dim());
  ker::affine(lin.w.value.data(), lin.b.value.data(), nodes_[x].val.data(),
              y.data(), lin.out_dim(), lin.in_dim());
  Linear* l = &lin;
  return push(std::move(y), [l, x](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    const auto& xv = t.nodes_[x].val;
    const int rows = l->out_dim(), cols = l->in_dim();
    ker::matvec_t_acc(l->w.value.data(), dy.data(), t.mutable_grad(x).data(), rows, cols);
    ker::ger_acc(l->w.grad.data(), dy.data(), xv.data(), rows, cols);
    ker::axpy(1.0, dy.data(), l->b.grad.data(), rows);
  });
}

Tape::Id Tape::relu(Id x) {
  std::vector<double> y = nodes_[x].val;
  for (double& v : y) v = v > 0.0 ? v : 0.0;
  return push(std::move(y), [x](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    const auto& xv = t.nodes_[x].val;
    auto& dx = t.mutable_grad(x);
    for (size_t i = 0; i < dx.size(); ++i)
      if (xv[i] > 0.0) dx[i] += dy[i];
  });
}

Tape::Id Tape::tanh(Id x) {
  std::vector<double> y = nodes_[x].val;
  for (double& v : y) v = std::tanh(v);
  return push(std::move(y), [x](Tape& t, Id self) {
    const Node& me = t.nodes_[self];
    auto& dx = t.mutable_grad(x);
    for (size_t i = 0; i < dx.size(); ++i)
      dx[i] += me.grad[i] * (1.0 - me.val[i] * me.val[i]);
  });
}

Tape::Id Tape::sigmoid(Id x) {
  std::vector<double> y = nodes_[x].val;
  for (double& v : y) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(y), [x](Tape& t, Id self) {
    const Node& me = t.nodes_[self];
    auto& dx = t.mutable_grad(x);
    for (size_t i = 0; i < dx.size(); ++i)
      dx[i] += me.grad[i] * me.val[i] * (1.0 - me.val[i]);
  });
}

Tape::Id Tape::exp(Id x) {
  std::vector<double> y = nodes_[x].val;
  for (double& v : y) v = std::exp(v);
  return push(std::move(y), [x](Tape& t, Id self) {
    const Node& me = t.nodes_[self];
    auto& dx = t.mutable_grad(x);
    for (size_t i = 0; i < dx.size(); ++i) dx[i] += me.grad[i] * me.val[i];
  });
}

Tape::Id Tape::add(Id a, Id b) {
  assert(dim(a) == dim(b));
  std::vector<double> y = nodes_[a].val;
  const auto& bv = nodes_[b].val;
  for (size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return push(std::move(y), [a, b](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    ker::axpy(1.0, dy.data(), t.mutable_grad(a).data(), static_cast<int>(dy.size()));
    ker::axpy(1.0, dy.data(), t.mutable_grad(b).data(), static_cast<int>(dy.size()));
  });
}

Tape::Id Tape::sub(Id a, Id b) {
  assert(dim(a) == dim(b));
  std::vector<double> y = nodes_[a].val;
  const auto& bv = nodes_[b].val;
  for (size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return push(std::move(y), [a, b](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    ker::axpy(1.0, dy.data(), t.mutable_grad(a).data(), static_cast<int>(dy.size()));
    ker::axpy(-1.0, dy.data(), t.mutable_grad(b).data(), static_cast<int>(dy.size()));
  });
}

Tape::Id Tape::mul(Id a, Id b) {
  assert(dim(a) == dim(b));
  std::vector<double> y = nodes_[a].val;
  const auto& bv = nodes_[b].val;
  for (size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return push(std::move(y), [a, b](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    const auto& av = t.nodes_[a].val;
    const auto& bv2 = t.nodes_[b].val;
    auto& da = t.mutable_grad(a);
    auto& db = t.mutable_grad(b);
    for (size_t i = 0; i < dy.size(); ++i) {
      da[i] += dy[i] * bv2[i];
      db[i] += dy[i] * av[i];
    }
  });
}

Tape::Id Tape::scale(Id x, double c) {
  std::vector<double> y = nodes_[x].val;
  for (double& v : y) v *= c;
  return push(std::move(y), [x, c](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    ker::axpy(c, dy.data(), t.mutable_grad(x).data(), static_cast<int>(dy.size()));
  });
}

Tape::Id Tape::add_const(Id x, double c) {
  std::vector<double> y = nodes_[x].val;
  for (double& v : y) v += c;
  return push(std::move(y), [x](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    ker::axpy(1.0, dy.data(), t.mutable_grad(x).data(), static_cast<int>(dy.size()));
  });
}

Tape::Id Tape::concat(std::span<const Id> parts) {
  std::vector<double> y;
  for (Id p : parts) {
    const auto& v = nodes_[p].val;
    y.insert(y.end(), v.begin(), v.end());
  }
  std::vector<Id> ps(parts.begin(), parts.end());
  return push(std::move(y), [ps](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    size_t off = 0;
    for (Id p : ps) {
      auto& dp = t.mutable_grad(p);
      for (size_t i = 0; i < dp.size(); ++i) dp[i] += dy[off + i];
      off += dp.size();
    }
  });
}

Tape::Id Tape::concat(std::initializer_list<Id> parts) {
  return concat(std::span<const Id>(parts.begin(), parts.size()));
}

Tape::Id Tape::slice(Id x, int offset, int len) {
  assert(offset >= 0 && offset + len <= dim(x));
  const auto& xv = nodes_[x].val;
  std::vector<double> y(xv.begin() + offset, xv.begin() + offset + len);
  return push(std::move(y), [x, offset](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    auto& dx = t.mutable_grad(x);
    for (size_t i = 0; i < dy.size(); ++i) dx[offset + i] += dy[i];
  });
}

Tape::Id Tape::sum(Id x) {
  double s = 0.0;
  for (double v : nodes_[x].val) s += v;
  return push({s}, [x](Tape& t, Id self) {
    const double g = t.nodes_[self].grad[0];
    for (double& v : t.mutable_grad(x)) v += g;
  });
}

Tape::Id Tape::mean_stack(std::span<const Id> xs) {
  assert(!xs.empty());
  const double inv = 1.0 / static_cast<double>(xs.size());
  std::vector<double> y(nodes_[xs[0]].val.size(), 0.0);
  for (Id x : xs) {
    const auto& v = nodes_[x].val;
    assert(v.size() == y.size());
    for (size_t i = 0; i < y.size(); ++i) y[i] += v[i];
  }
  for (double& v : y) v *= inv;
  std::vector<Id> ids(xs.begin(), xs.end());
  return push(std::move(y), [ids, inv](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    for (Id x : ids)
      ker::axpy(inv, dy.data(), t.mutable_grad(x).data(), static_cast<int>(dy.size()));
  });
}

Tape::Id Tape::sum_stack(std::span<const Id> xs) {
  assert(!xs.empty());
  std::vector<double> y(nodes_[xs[0]].val.size(), 0.0);
  for (Id x : xs) {
    const auto& v = nodes_[x].val;
    assert(v.size() == y.size());
    for (size_t i = 0; i < y.size(); ++i) y[i] += v[i];
  }
  std::vector<Id> ids(xs.begin(), xs.end());
  return push(std::move(y), [ids](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    for (Id x : ids)
      ker::axpy(1.0, dy.data(), t.mutable_grad(x).data(), static_cast<int>(dy.size()));
  });
}

Tape::Id Tape::broadcast_mul(Id s, Id x) {
  assert(dim(s) == 1);
  const double sv = nodes_[s].val[0];
  std::vector<double> y = nodes_[x].val;
  for (double& v : y) v *= sv;
  return push(std::move(y), [s, x](Tape& t, Id self) {
    const auto& dy = t.nodes_[self].grad;
    const auto& xv = t.nodes_[x].val;
    const double sv2 = t.nodes_[s].val[0];
    auto& dxv = t.mutable_grad(x);
    double ds = 0.0;
    for (size_t i = 0; i < dy.size(); ++i) {
      ds += dy[i] * xv[i];
      dxv[i] += dy[i] * sv2;
    }
    t.mutable_grad(s)[0] += ds;
  });
}

Tape::Id Tape::gru_step(GruParams& p, Id x, Id h) {
  const int H = p.hidden;
  Id gi = affine(p.ih, x);
  Id gh = affine(p.hh, h);
  Id r = sigmoid(add(slice(gi, 0, H), slice(gh, 0, H)));
  Id z = sigmoid(add(slice(gi, H, H), slice(gh, H, H)));
  Id n = this->tanh(add(slice(gi, 2 * H, H), mul(r, slice(gh, 2 * H, H))));
  return add(n, mul(z, sub(h, n)));
}

Tape::Id Tape::softmax_cross_entropy(Id logits, int target) {
  const auto& lv = nodes_[logits].val;
  assert(target >= 0 && target < static_cast<int>(lv.size()));
  double m = lv[0];
  for (double v : lv) m = std::max(m, v);
  double lse = 0.0;
  for (double v : lv) lse += std::exp(v - m);
  lse = m + std::log(lse);
  std::vector<double> probs(lv.size());
  for (size_t i = 0; i < lv.size(); ++i) probs[i] = std::exp(lv[i] - lse);
  const double ce = lse - lv[target];
  return push({ce}, [logits, target, probs](Tape& t, Id self) {
    const double g = t.nodes_[self].grad[0];
    auto& dl = t.mutable_grad(logits);
    for (size_t i = 0; i < dl.size(); ++i)
      dl[i] += g * (probs[i] - (static_cast<int>(i) == target ? 1.0 : 0.0));
  });
}

Tape::Id Tape::bivariate_nll(Id p5, double x, double y) {
  const auto& p = nodes_[p5].val;
  assert(p.size() == 5);
  const double mu_x = p[0], mu_y = p[1], sx = p[2], sy = p[3], rho = p[4];
  if (!(sx > 0.0) || !(sy > 0.0) || !(std::abs(rho) < 1.0))
    throw std::domain_error("bivariate_nll: sigma must be positive and |rho| < 1");
  const double q = 1.0 - rho * rho;
  const double a = (x - mu_x) / sx;
  const double b = (y - mu_y) / sy;
  const double z = a * a - 2.0 * rho * a * b + b * b;
  const double nll = std::log(2.0 * std::numbers::pi) + std::log(sx) +
                     std::log(sy) + 0.5 * std::log(q) + z / (2.0 * q);
  return push({nll}, [p5, x, y](Tape& t, Id self) {
    const double g = t.nodes_[self].grad[0];
    const auto& pv = t.nodes_[p5].val;
    const double sx2 = pv[2], sy2 = pv[3], rho2 = pv[4];
    const double q2 = 1.0 - rho2 * rho2;
    const double a2 = (x - pv[0]) / sx2;
    const double b2 = (y - pv[1]) / sy2;
    const double z2 = a2 * a2 - 2.0 * rho2 * a2 * b2 + b2 * b2;
    auto& d = t.mutable_grad(p5);
    d[0] += g * (-(a2 - rho2 * b2) / (q2 * sx2));
    d[1] += g * (-(b2 - rho2 * a2) / (q2 * sy2));
    d[2] += g * ((1.0 - a2 * (a2 - rho2 * b2) / q2) / sx2);
    d[3] += g * ((1.0 - b2 * (b2 - rho2 * a2) / q2) / sy2);
    d[4] += g * (-rho2 / q2 - a2 * b2 / q2 + z2 * rho2 / (q2 * q2));
  });
}

void Tape::backward(Id root) {
  if (dim(root) != 1) throw std::logic_error("backward root must be scalar");
  nodes_[root].grad[0] += 1.0;
  for (Id i = root; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back(*this, i);
}

}  // namespace titan::nn
