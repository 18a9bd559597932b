#include <doctest.h>

#include <cstring>
#include <vector>

#include "titan/core/rng.hpp"
#include "titan/kernels/kernels.hpp"

namespace ker = titan::kernels;
using titan::core::Rng;

namespace {

std::vector<double> random_vec(Rng& rng, int n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar dot matches a widened reference") {
  Rng rng(7);
  for (int n : {1, 3, 4, 7, 64, 257}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    long double ref = 0.0L;
    for (int i = 0; i < n; ++i) ref += static_cast<long double>(a[i]) * b[i];
    const auto& impl = ker::detail::scalar_impl();
    CHECK(impl.dot(a.data(), b.data(), n) ==
          doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
}

TEST_CASE("affine matches naive matrix-vector product") {
  Rng rng(11);
  const int rows = 5, cols = 7;
  const auto w = random_vec(rng, rows * cols);
  const auto b = random_vec(rng, rows);
  const auto x = random_vec(rng, cols);
  std::vector<double> y(rows);
  ker::detail::scalar_impl().affine(w.data(), b.data(), x.data(), y.data(), rows, cols);
  for (int r = 0; r < rows; ++r) {
    long double ref = b[r];
    for (int c = 0; c < cols; ++c) ref += static_cast<long double>(w[r * cols + c]) * x[c];
    CHECK(y[r] == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
}

TEST_CASE("avx2 kernels are bit-identical to scalar" *
          doctest::skip(!ker::cpu_supports_avx2())) {
  const auto& s = ker::detail::scalar_impl();
  const auto& v = ker::detail::avx2_impl();
  Rng rng(23);

  for (int n : {1, 2, 3, 4, 5, 8, 15, 16, 63, 64, 127, 512, 1019}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);

    const double ds = s.dot(a.data(), b.data(), n);
    const double dv = v.dot(a.data(), b.data(), n);
    CHECK(std::memcmp(&ds, &dv, sizeof ds) == 0);

    auto ys = a, yv = a;
    s.axpy(1.7, b.data(), ys.data(), n);
    v.axpy(1.7, b.data(), yv.data(), n);
    CHECK(bits_equal(ys, yv));

    auto ws = a, wv = a, ms = b, mv = b;
    auto g = random_vec(rng, n);
    s.rmsprop_update(ws.data(), g.data(), ms.data(), n, 1e-3, 0.99, 1e-8);
    v.rmsprop_update(wv.data(), g.data(), mv.data(), n, 1e-3, 0.99, 1e-8);
    CHECK(bits_equal(ws, wv));
    CHECK(bits_equal(ms, mv));
  }

  for (auto [rows, cols] : {std::pair{1, 1}, {3, 5}, {16, 16}, {33, 129}, {512, 515}}) {
    const auto w = random_vec(rng, rows * cols);
    const auto b = random_vec(rng, rows);
    const auto x = random_vec(rng, cols);
    const auto dy = random_vec(rng, rows);

    std::vector<double> ys(rows), yv(rows);
    s.affine(w.data(), b.data(), x.data(), ys.data(), rows, cols);
    v.affine(w.data(), b.data(), x.data(), yv.data(), rows, cols);
    CHECK(bits_equal(ys, yv));

    std::vector<double> dxs(cols, 0.25), dxv(cols, 0.25);
    s.matvec_t_acc(w.data(), dy.data(), dxs.data(), rows, cols);
    v.matvec_t_acc(w.data(), dy.data(), dxv.data(), rows, cols);
    CHECK(bits_equal(dxs, dxv));

    auto dws = w, dwv = w;
    s.ger_acc(dws.data(), dy.data(), x.data(), rows, cols);
    v.ger_acc(dwv.data(), dy.data(), x.data(), rows, cols);
    CHECK(bits_equal(dws, dwv));
  }
}

TEST_CASE("dispatcher honors forced isa") {
  ker::force_isa(ker::Isa::scalar);
  CHECK(ker::active_isa() == ker::Isa::scalar);
  if (ker::cpu_supports_avx2()) {
    ker::force_isa(ker::Isa::avx2);
    CHECK(ker::active_isa() == ker::Isa::avx2);
  } else {
    CHECK_THROWS(ker::force_isa(ker::Isa::avx2));
  }
  ker::force_isa(ker::Isa::scalar);
}
